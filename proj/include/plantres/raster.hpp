#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace plantres {

/// 8-bit RGB image, row-major, interleaved channels.
class Raster {
 public:
  static constexpr int kChannels = 3;

  Raster() = default;
  Raster(int width, int height, std::uint8_t fill = 0);
  Raster(int width, int height, std::vector<std::uint8_t> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return samples_.empty(); }

  std::uint8_t at(int x, int y, int c) const {
    return samples_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }
  std::uint8_t& at(int x, int y, int c) {
    return samples_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }

  void set_pixel(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    auto* p = &samples_[(static_cast<std::size_t>(y) * width_ + x) * kChannels];
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }

  std::span<const std::uint8_t> samples() const { return samples_; }
  std::span<std::uint8_t> samples() { return samples_; }

  bool operator==(const Raster&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> samples_;
};

/// Square odd-sized filter, row-major weights; (dx, dy) are offsets from the
/// center in [-radius, radius].
struct Kernel {
  int size = 1;
  std::vector<double> weights{1.0};

  int radius() const { return size / 2; }
  double at(int dx, int dy) const {
    return weights[static_cast<std::size_t>(dy + radius()) * size + (dx + radius())];
  }
  double& at(int dx, int dy) {
    return weights[static_cast<std::size_t>(dy + radius()) * size + (dx + radius())];
  }
  double sum() const;
};

}  // namespace plantres
