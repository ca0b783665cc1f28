#pragma once

#include <filesystem>
#include <utility>

#include "plantres/raster.hpp"

namespace plantres {

// PNG (read/write, 8-bit RGB) and JPEG (read only). Format is chosen from
// the file signature on read. Grayscale and alpha inputs are converted to RGB.
Raster read_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Raster& img);

/// Width and height from the file header without decoding pixels.
std::pair<int, int> read_image_size(const std::filesystem::path& path);

}  // namespace plantres
