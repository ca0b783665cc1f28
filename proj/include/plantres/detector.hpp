#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "plantres/raster.hpp"
#include "plantres/types.hpp"

namespace plantres {

/// Signed per-pixel map, row-major.
struct IntensityMap {
  int width = 0;
  int height = 0;
  std::vector<int> values;

  int at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // 0 or 1

  bool at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { values[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
};

enum class ThresholdMode { kOtsu, kFixed };

struct DetectorConfig {
  ThresholdMode threshold_mode = ThresholdMode::kOtsu;
  double fixed_threshold = 0.0;
  // Lower bound applied to the Otsu threshold; keeps soil-only images from
  // being split on their own noise.
  double otsu_floor = 30.0;
  double min_area_px = 120.0;
  double max_area_px = 1500.0;
  int morph_open_radius = 1;
};

void validate(const DetectorConfig& cfg);

/// ExG = 2G - R - B, in [-510, 510].
IntensityMap excess_green(const Raster& img);

/// Between-class-variance maximizing threshold over the 1021 integer bins
/// [-510, 510]; the lowest maximizer wins. Pixels above it are foreground.
/// Throws Error(kDegenerate) when the map holds a single value.
int otsu_threshold(const IntensityMap& map);

/// value > threshold.
BinaryMask binarize(const IntensityMap& map, double threshold);
BinaryMask binarize_otsu(const IntensityMap& map);

/// Erosion then dilation with the disc {dx^2 + dy^2 <= r^2}; out-of-image
/// neighbours are ignored.
BinaryMask morph_open(const BinaryMask& mask, int radius);

struct Component {
  std::size_t pixel_count = 0;
  BBox box;
};

/// 8-connected components ordered by (y_min, x_min). When `labels` is
/// given it receives, per pixel, the index of its component or -1.
std::vector<Component> connected_components(const BinaryMask& mask,
                                            std::vector<int>* labels = nullptr);

/// ExG -> threshold -> opening -> components -> area filter. The score is
/// the mean ExG over the component's pixels, min-max normalized by the
/// image's ExG range.
std::vector<Prediction> detect_plants(const Raster& img, const DetectorConfig& cfg,
                                      const std::string& image_id = {});

struct Patch {
  int x0 = 0;
  int y0 = 0;
  Raster image;
  Annotation annotation;
};

/// n patches at seeded uniform offsets. Boxes are clipped to the patch and
/// kept when at least half their area lies inside it.
std::vector<Patch> tile_patches(const Raster& img, const Annotation& a, int patch_size, int n,
                                std::uint64_t seed);

}  // namespace plantres
