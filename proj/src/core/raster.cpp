#include "plantres/raster.hpp"

#include <string>

#include "plantres/error.hpp"

namespace plantres {

Raster::Raster(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kSize, "raster dimensions must be >= 1, got " + std::to_string(width) +
                                      "x" + std::to_string(height));
  }
  samples_.assign(static_cast<std::size_t>(width) * height * kChannels, fill);
}

Raster::Raster(int width, int height, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (width < 1 || height < 1) throw Error(ErrorCode::kSize, "raster dimensions must be >= 1");
  if (samples_.size() != static_cast<std::size_t>(width) * height * kChannels) {
    throw Error(ErrorCode::kSize, "raster sample count does not match width*height*3");
  }
}

double Kernel::sum() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

}  // namespace plantres
