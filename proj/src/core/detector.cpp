#include "plantres/detector.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "plantres/counter_rng.hpp"
#include "plantres/error.hpp"
#include "plantres/geometry.hpp"

namespace plantres {

void validate(const DetectorConfig& cfg) {
  if (!(cfg.min_area_px > 0.0) || !(cfg.min_area_px < cfg.max_area_px)) {
    throw Error(ErrorCode::kInvalidArgument, "detector needs 0 < min_area_px < max_area_px");
  }
  if (cfg.morph_open_radius < 0) {
    throw Error(ErrorCode::kInvalidArgument, "morph_open_radius must be >= 0");
  }
}

IntensityMap excess_green(const Raster& img) {
  IntensityMap m{img.width(), img.height(), {}};
  m.values.resize(static_cast<std::size_t>(img.width()) * img.height());
  const auto s = img.samples();
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    m.values[i] = 2 * s[3 * i + 1] - s[3 * i] - s[3 * i + 2];
  }
  return m;
}

int otsu_threshold(const IntensityMap& map) {
  constexpr int kBins = 1021;
  std::array<std::int64_t, kBins> hist{};
  for (int v : map.values) {
    if (v < -510 || v > 510) {
      throw Error(ErrorCode::kInvalidArgument, "intensity " + std::to_string(v) + " outside [-510, 510]");
    }
    ++hist[static_cast<std::size_t>(v + 510)];
  }
  std::int64_t n = 0, total = 0;
  for (int b = 0; b < kBins; ++b) {
    n += hist[b];
    total += hist[b] * (b - 510);
  }

  // Between-class variance scaled by N^2: (n1*S0 - n0*S1)^2 / (n0*n1).
  std::int64_t n0 = 0, s0 = 0;
  double best = 0.0;
  int best_t = 0;
  bool found = false;
  for (int b = 0; b < kBins - 1; ++b) {
    n0 += hist[b];
    s0 += hist[b] * (b - 510);
    const std::int64_t n1 = n - n0;
    if (n0 == 0 || n1 == 0) continue;
    const std::int64_t s1 = total - s0;
    const auto diff = static_cast<double>(static_cast<__int128>(n1) * s0 - static_cast<__int128>(n0) * s1);
    const double score = diff * diff / (static_cast<double>(n0) * static_cast<double>(n1));
    if (score > best) {
      best = score;
      best_t = b - 510;
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::kDegenerate, "otsu: histogram holds a single value");
  return best_t;
}

BinaryMask binarize(const IntensityMap& map, double threshold) {
  BinaryMask mask{map.width, map.height, {}};
  mask.values.resize(map.values.size());
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    mask.values[i] = map.values[i] > threshold ? 1 : 0;
  }
  return mask;
}

BinaryMask binarize_otsu(const IntensityMap& map) { return binarize(map, otsu_threshold(map)); }

namespace {

std::vector<std::pair<int, int>> disc(int radius) {
  std::vector<std::pair<int, int>> offs;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) offs.emplace_back(dx, dy);
    }
  }
  return offs;
}

BinaryMask morph(const BinaryMask& in, const std::vector<std::pair<int, int>>& se, bool erode) {
  BinaryMask out{in.width, in.height, std::vector<std::uint8_t>(in.values.size(), 0)};
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      bool v = erode;
      for (const auto& [dx, dy] : se) {
        const int sx = x + dx;
        const int sy = y + dy;
        if (sx < 0 || sy < 0 || sx >= in.width || sy >= in.height) continue;
        if (in.at(sx, sy) != erode) {
          v = !erode;
          break;
        }
      }
      out.set(x, y, v);
    }
  }
  return out;
}

}  // namespace

BinaryMask morph_open(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  const auto se = disc(radius);
  return morph(morph(mask, se, true), se, false);
}

std::vector<Component> connected_components(const BinaryMask& mask, std::vector<int>* labels) {
  const int w = mask.width;
  const int h = mask.height;
  std::vector<int> label(mask.values.size(), -1);
  std::vector<Component> comps;
  std::vector<std::size_t> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t start = static_cast<std::size_t>(y) * w + x;
      if (!mask.values[start] || label[start] >= 0) continue;
      const int id = static_cast<int>(comps.size());
      int x0 = x, x1 = x, y0 = y, y1 = y;
      std::size_t count = 0;
      label[start] = id;
      stack.push_back(start);
      while (!stack.empty()) {
        const std::size_t idx = stack.back();
        stack.pop_back();
        ++count;
        const int cx = static_cast<int>(idx % w);
        const int cy = static_cast<int>(idx / w);
        x0 = std::min(x0, cx);
        x1 = std::max(x1, cx);
        y0 = std::min(y0, cy);
        y1 = std::max(y1, cy);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx;
            const int ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
            if (mask.values[n] && label[n] < 0) {
              label[n] = id;
              stack.push_back(n);
            }
          }
        }
      }
      comps.push_back({count, BBox{static_cast<double>(x0), static_cast<double>(y0),
                                   static_cast<double>(x1 + 1), static_cast<double>(y1 + 1)}});
    }
  }
  std::vector<std::size_t> order(comps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (comps[a].box.y_min != comps[b].box.y_min) return comps[a].box.y_min < comps[b].box.y_min;
    return comps[a].box.x_min < comps[b].box.x_min;
  });
  std::vector<Component> sorted;
  sorted.reserve(comps.size());
  std::vector<int> rank(comps.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.push_back(comps[order[i]]);
    rank[order[i]] = static_cast<int>(i);
  }
  if (labels) {
    for (int& l : label) {
      if (l >= 0) l = rank[static_cast<std::size_t>(l)];
    }
    *labels = std::move(label);
  }
  return sorted;
}

std::vector<Prediction> detect_plants(const Raster& img, const DetectorConfig& cfg,
                                      const std::string& image_id) {
  validate(cfg);
  const IntensityMap exg = excess_green(img);
  const auto [lo_it, hi_it] = std::minmax_element(exg.values.begin(), exg.values.end());
  const int lo = *lo_it;
  const int hi = *hi_it;
  if (lo == hi) return {};  // flat image: nothing stands out

  double threshold = cfg.fixed_threshold;
  if (cfg.threshold_mode == ThresholdMode::kOtsu) {
    threshold = std::max<double>(otsu_threshold(exg), cfg.otsu_floor);
  }
  const BinaryMask mask = morph_open(binarize(exg, threshold), cfg.morph_open_radius);

  std::vector<int> labels;
  const std::vector<Component> comps = connected_components(mask, &labels);
  std::vector<double> sums(comps.size(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) sums[static_cast<std::size_t>(labels[i])] += exg.values[i];
  }

  std::vector<Prediction> out;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const Component& c = comps[k];
    const double px = static_cast<double>(c.pixel_count);
    if (px < cfg.min_area_px || px > cfg.max_area_px) continue;
    const double mean = sums[k] / px;
    const double score = std::clamp((mean - lo) / static_cast<double>(hi - lo), 0.0, 1.0);
    out.push_back({image_id, c.box, score});
  }
  return out;
}

std::vector<Patch> tile_patches(const Raster& img, const Annotation& a, int patch_size, int n,
                                std::uint64_t seed) {
  if (patch_size < 1) throw Error(ErrorCode::kInvalidArgument, "patch size must be >= 1");
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "patch count must be >= 0");
  if (img.width() < patch_size || img.height() < patch_size) {
    throw Error(ErrorCode::kSize, "image " + std::to_string(img.width()) + "x" +
                                      std::to_string(img.height()) + " smaller than patch size " +
                                      std::to_string(patch_size));
  }
  const CounterRng rng(seed);
  const int span_x = img.width() - patch_size + 1;
  const int span_y = img.height() - patch_size + 1;
  std::vector<Patch> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::uint64_t>(i);
    Patch p;
    p.x0 = std::min(span_x - 1, static_cast<int>(rng.uniform({0, k}) * span_x));
    p.y0 = std::min(span_y - 1, static_cast<int>(rng.uniform({1, k}) * span_y));
    p.image = Raster(patch_size, patch_size);
    for (int y = 0; y < patch_size; ++y) {
      for (int x = 0; x < patch_size; ++x) {
        for (int c = 0; c < 3; ++c) p.image.at(x, y, c) = img.at(p.x0 + x, p.y0 + y, c);
      }
    }
    const BBox window{static_cast<double>(p.x0), static_cast<double>(p.y0),
                      static_cast<double>(p.x0 + patch_size), static_cast<double>(p.y0 + patch_size)};
    char id[32];
    std::snprintf(id, sizeof(id), "_patch%02d", i);
    p.annotation.image_id = a.image_id + id;
    for (const BBox& b : a.boxes) {
      const double inside = intersection_area(b, window);
      if (inside < 0.5 * area(b)) continue;
      p.annotation.boxes.push_back({std::max(b.x_min, window.x_min) - p.x0,
                                    std::max(b.y_min, window.y_min) - p.y0,
                                    std::min(b.x_max, window.x_max) - p.x0,
                                    std::min(b.y_max, window.y_max) - p.y0});
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace plantres
