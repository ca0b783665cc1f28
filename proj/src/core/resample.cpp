#include "plantres/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "plantres/error.hpp"

namespace plantres {

namespace {

void require_odd(int size, const char* what) {
  if (size < 1 || size % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " must be odd and >= 1, got " + std::to_string(size));
  }
}

std::uint8_t to_u8(double v) {
  v = std::clamp(v, 0.0, 255.0);
  return static_cast<std::uint8_t>(std::lround(v));
}

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

}  // namespace

void validate(const DegradeParams& p) {
  if (!(p.gaussian_sigma > 0.0) || !std::isfinite(p.gaussian_sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "gaussian_sigma must be > 0");
  }
  require_odd(p.gaussian_window, "gaussian_window");
  require_odd(p.motion_kernel, "motion_kernel");
  if (!std::isfinite(p.motion_angle_deg)) {
    throw Error(ErrorCode::kInvalidArgument, "motion_angle_deg must be finite");
  }
  if (p.decimation_factor < 1) throw Error(ErrorCode::kInvalidArgument, "decimation_factor must be >= 1");
}

Kernel gaussian_kernel(double sigma, int window) {
  require_odd(window, "gaussian window");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "gaussian sigma must be > 0");
  }
  Kernel k;
  k.size = window;
  k.weights.assign(static_cast<std::size_t>(window) * window, 0.0);
  const int r = k.radius();
  const double two_var = 2.0 * sigma * sigma;
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double w = std::exp(-static_cast<double>(dx * dx + dy * dy) / two_var);
      k.at(dx, dy) = w;
      sum += w;
    }
  }
  for (double& w : k.weights) w /= sum;
  return k;
}

Kernel motion_blur_kernel(int size, double angle_deg) {
  require_odd(size, "motion kernel size");
  Kernel k;
  k.size = size;
  k.weights.assign(static_cast<std::size_t>(size) * size, 0.0);
  const int r = k.radius();
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  int cells = 0;
  auto mark = [&](int dx, int dy) {
    if (k.at(dx, dy) == 0.0) ++cells;
    k.at(dx, dy) = 1.0;
  };
  // Step along the dominant axis so the segment covers the full kernel width.
  if (std::abs(c) >= std::abs(s)) {
    for (int dx = -r; dx <= r; ++dx) {
      mark(dx, static_cast<int>(std::lround(dx * s / c)));
    }
  } else {
    for (int dy = -r; dy <= r; ++dy) {
      mark(static_cast<int>(std::lround(dy * c / s)), dy);
    }
  }
  for (double& w : k.weights) w /= cells;
  return k;
}

Raster convolve(const Raster& img, const Kernel& kernel) {
  require_odd(kernel.size, "kernel size");
  const int w = img.width();
  const int h = img.height();
  const int r = kernel.radius();
  Raster out(w, h);

  // Column lookup with replicate padding.
  std::vector<int> xs(static_cast<std::size_t>(w + 2 * r));
  for (int i = 0; i < w + 2 * r; ++i) xs[i] = clamp_index(i - r, w);

  const auto src = img.samples();
  auto dst = out.samples();
  std::vector<double> acc(static_cast<std::size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int dy = -r; dy <= r; ++dy) {
      // out(x, y) = sum k(dx, dy) * img(x - dx, y - dy)
      const int sy = clamp_index(y - dy, h);
      const std::uint8_t* row = src.data() + static_cast<std::size_t>(sy) * w * 3;
      for (int dx = -r; dx <= r; ++dx) {
        const double wgt = kernel.at(dx, dy);
        if (wgt == 0.0) continue;
        for (int x = 0; x < w; ++x) {
          const std::uint8_t* px = row + static_cast<std::size_t>(xs[x - dx + r]) * 3;
          double* a = &acc[static_cast<std::size_t>(x) * 3];
          a[0] += wgt * px[0];
          a[1] += wgt * px[1];
          a[2] += wgt * px[2];
        }
      }
    }
    std::uint8_t* out_row = dst.data() + static_cast<std::size_t>(y) * w * 3;
    for (std::size_t i = 0; i < acc.size(); ++i) out_row[i] = to_u8(acc[i]);
  }
  return out;
}

Raster decimate(const Raster& img, int factor) {
  if (factor < 1) throw Error(ErrorCode::kInvalidArgument, "decimation factor must be >= 1");
  const int w = img.width() / factor;
  const int h = img.height() / factor;
  if (w < 1 || h < 1) {
    throw Error(ErrorCode::kSize, "image " + std::to_string(img.width()) + "x" +
                                      std::to_string(img.height()) +
                                      " too small for decimation factor " + std::to_string(factor));
  }
  Raster out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x * factor, y * factor, c);
    }
  }
  return out;
}

Annotation scale_boxes(const Annotation& a, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorCode::kInvalidArgument, "scale factor must be > 0");
  }
  Annotation out{a.image_id, {}};
  out.boxes.reserve(a.boxes.size());
  for (const BBox& b : a.boxes) {
    out.boxes.push_back({b.x_min * factor, b.y_min * factor, b.x_max * factor, b.y_max * factor});
  }
  return out;
}

std::pair<Raster, Annotation> degrade(const Raster& img, const Annotation& boxes,
                                      const DegradeParams& p) {
  validate(p);
  if (img.width() < p.decimation_factor || img.height() < p.decimation_factor) {
    throw Error(ErrorCode::kSize, "image smaller than the decimation factor");
  }
  Raster blurred = convolve(img, gaussian_kernel(p.gaussian_sigma, p.gaussian_window));
  blurred = convolve(blurred, motion_blur_kernel(p.motion_kernel, p.motion_angle_deg));
  return {decimate(blurred, p.decimation_factor),
          scale_boxes(boxes, 1.0 / static_cast<double>(p.decimation_factor))};
}

double cubic_weight(double x, double a) {
  x = std::abs(x);
  if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
  return 0.0;
}

namespace {

struct Taps {
  int first;  // source index of the first of four taps (before clamping)
  double w[4];
};

std::vector<Taps> make_taps(int in, int out) {
  std::vector<Taps> taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (int i = 0; i < out; ++i) {
    const double src = (i + 0.5) * scale - 0.5;
    const double base = std::floor(src);
    const double t = src - base;
    Taps& tp = taps[i];
    tp.first = static_cast<int>(base) - 1;
    tp.w[0] = cubic_weight(1.0 + t);
    tp.w[1] = cubic_weight(t);
    tp.w[2] = cubic_weight(1.0 - t);
    tp.w[3] = cubic_weight(2.0 - t);
  }
  return taps;
}

}  // namespace

Raster bicubic_resize(const Raster& img, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorCode::kInvalidArgument, "resize factor must be > 0");
  }
  const double ow = std::round(img.width() * factor);
  const double oh = std::round(img.height() * factor);
  if (ow < 1.0 || oh < 1.0 || ow > 1e5 || oh > 1e5) {
    throw Error(ErrorCode::kSize, "degenerate output size for resize factor " + std::to_string(factor));
  }
  const int out_w = static_cast<int>(ow);
  const int out_h = static_cast<int>(oh);
  const int in_w = img.width();
  const int in_h = img.height();
  const auto xt = make_taps(in_w, out_w);
  const auto yt = make_taps(in_h, out_h);

  // Horizontal pass at source rows, kept in full precision.
  std::vector<double> tmp(static_cast<std::size_t>(out_w) * in_h * 3);
  for (int y = 0; y < in_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const Taps& t = xt[x];
      for (int c = 0; c < 3; ++c) {
        double v = 0.0;
        for (int k = 0; k < 4; ++k) v += t.w[k] * img.at(clamp_index(t.first + k, in_w), y, c);
        tmp[(static_cast<std::size_t>(y) * out_w + x) * 3 + c] = v;
      }
    }
  }
  Raster out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    const Taps& t = yt[y];
    for (int x = 0; x < out_w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double v = 0.0;
        for (int k = 0; k < 4; ++k) {
          const int sy = clamp_index(t.first + k, in_h);
          v += t.w[k] * tmp[(static_cast<std::size_t>(sy) * out_w + x) * 3 + c];
        }
        out.at(x, y, c) = to_u8(v);
      }
    }
  }
  return out;
}

std::array<double, 3> image_variance(const Raster& img) {
  std::array<double, 3> sum{}, sq{};
  const auto s = img.samples();
  for (std::size_t i = 0; i < s.size(); i += 3) {
    for (int c = 0; c < 3; ++c) {
      const double v = s[i + c];
      sum[c] += v;
      sq[c] += v * v;
    }
  }
  const double n = static_cast<double>(s.size() / 3);
  std::array<double, 3> var{};
  for (int c = 0; c < 3; ++c) {
    const double mean = sum[c] / n;
    var[c] = std::max(0.0, sq[c] / n - mean * mean);
  }
  return var;
}

}  // namespace plantres
