#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "plantres/raster.hpp"
#include "plantres/types.hpp"

namespace plantres {

/// A descriptor together with its decoded images (images[i] belongs to
/// descriptor.images[i]).
struct Dataset {
  DatasetDescriptor descriptor;
  std::vector<Raster> images;
};

/// Loads a manifest and decodes every image it lists.
Dataset load_dataset(const std::filesystem::path& manifest_path, int workers = 1);

/// Writes images/<id>.png, annotations/<id>.xml and manifest.json under
/// `dir`, with relative paths in the manifest. Image paths in the returned
/// descriptor point at the written files.
DatasetDescriptor write_dataset(const Dataset& ds, const std::filesystem::path& dir,
                                int workers = 1);

}  // namespace plantres
