#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "plantres/types.hpp"

namespace plantres {

// ---------------------------------------------------------------------------
// Labeling-tool XML (Pascal VOC layout).
//
// The file stores 1-based inclusive integer pixel corners. Internally boxes
// use 0-based continuous edges: x_min = xmin - 1, x_max = xmax, so an object
// spanning pixels 10..49 has width 40 in both conventions.
// ---------------------------------------------------------------------------

struct VocImageSize {
  int width = 0;
  int height = 0;
  int depth = 3;
};

/// Parses one annotation document. The image id is the `filename` element
/// with its extension removed. Flags such as `difficult` or `truncated` are
/// ignored; any object `name` is accepted.
Annotation parse_voc_xml(std::string_view content);

/// Same, also returning the declared `size` block (zeros when absent).
Annotation parse_voc_xml(std::string_view content, VocImageSize* size);

/// Writes `annotation` back in the labeling-tool layout with object name
/// "plant". Integer corners are written as integers; fractional corners are
/// written with enough digits to round-trip exactly.
std::string serialize_annotation(const Annotation& annotation, const VocImageSize& size = {},
                                 std::string_view filename = {});

// ---------------------------------------------------------------------------
// Prediction interchange: one JSON object per line with exactly the keys
// image_id, x_min, y_min, x_max, y_max, score. Blank lines are skipped.
// ---------------------------------------------------------------------------

std::vector<Prediction> parse_predictions(std::string_view content);
std::string serialize_predictions(const std::vector<Prediction>& predictions);

// ---------------------------------------------------------------------------
// Dataset manifests (JSON):
//   { "name": ..., "role": ...,
//     "images": [ {"id", "path", "gsd_cm", "site", ["width", "height"]} ],
//     "annotations": [ {"image_id", "path"} ] }
// ---------------------------------------------------------------------------

/// Supplies what a manifest refers to but does not contain.
struct ManifestResolver {
  // Annotation XML at `path` (as written in the manifest).
  std::function<Annotation(const std::string& path)> load_annotation;
  // Pixel size of the image at `path`; used when the manifest omits it.
  std::function<std::pair<int, int>(const std::string& path)> image_size;
};

DatasetDescriptor parse_manifest(std::string_view content, const ManifestResolver& resolver);

/// Manifest text for `d` (image paths taken from ImageMeta::path), binding
/// image i to the annotation file `annotation_paths[i]` ("" for none).
std::string serialize_manifest(const DatasetDescriptor& d,
                               const std::vector<std::string>& annotation_paths);

/// Resolver reading annotation XML and image headers relative to `base_dir`.
ManifestResolver file_resolver(const std::filesystem::path& base_dir);

/// parse_manifest on a file, with image paths rewritten to absolute ones.
DatasetDescriptor load_manifest(const std::filesystem::path& manifest_path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace plantres
