#include "plantres/synthfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "plantres/counter_rng.hpp"
#include "plantres/error.hpp"
#include "plantres/parallel.hpp"

namespace plantres {

namespace {

constexpr double kReferenceGsd = 0.3;
constexpr int kMaxSide = 8192;

// Draw streams; each random quantity has its own key prefix.
enum Stream : std::uint64_t {
  kJitterX = 1,
  kJitterY,
  kPlantSize,
  kLeafCount,
  kLeafBaseAngle,
  kLeafAngle,
  kLeafLength,
  kLeafWidth,
  kLeafColor,
  kLattice,
  kSensor,
};

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

// Value noise in [-1, 1] on an integer lattice, smoothstep interpolated.
double value_noise(const CounterRng& rng, std::uint64_t octave, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  auto corner = [&](std::int64_t cx, std::int64_t cy) {
    return 2.0 * rng.uniform({kLattice, octave, static_cast<std::uint64_t>(cx),
                              static_cast<std::uint64_t>(cy)}) -
           1.0;
  };
  const double tx = smooth(x - fx);
  const double ty = smooth(y - fy);
  const double top = corner(ix, iy) * (1 - tx) + corner(ix + 1, iy) * tx;
  const double bottom = corner(ix, iy + 1) * (1 - tx) + corner(ix + 1, iy + 1) * tx;
  return top * (1 - ty) + bottom * ty;
}

// Three approximately N(0, 1) values for one pixel (Irwin-Hall of four
// 16-bit uniforms each).
void sensor_noise(const CounterRng& rng, std::uint64_t x, std::uint64_t y, double out[3]) {
  for (std::uint64_t c = 0; c < 3; ++c) {
    const std::uint64_t h = rng.bits({kSensor, x, y, c});
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += static_cast<double>((h >> (16 * k)) & 0xFFFF) / 65536.0;
    out[c] = (s - 2.0) * std::numbers::sqrt3;
  }
}

std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

struct Leaf {
  double cx, cy;  // ellipse center, px
  double ux, uy;  // unit vector along the leaf
  double half_length, half_width;
};

struct Plant {
  double cx, cy;  // px
  double radius;  // px
  std::vector<Leaf> leaves;
  double r, g, b;
};

struct Layout {
  int width = 0;
  int height = 0;
  std::vector<Plant> plants;
};

Layout plan(const SynthFieldParams& p) {
  Layout lay;
  const double w = p.canvas_width_px > 0 ? p.canvas_width_px
                                         : std::round(p.plants_per_row * p.plant_spacing_cm / p.gsd_cm);
  const double h = p.canvas_height_px > 0 ? p.canvas_height_px
                                          : std::round(p.rows * p.row_spacing_cm / p.gsd_cm);
  if (w < 1 || h < 1 || w > kMaxSide || h > kMaxSide) {
    std::ostringstream os;
    os << "synthetic canvas " << w << "x" << h << " outside [1, " << kMaxSide << "] per side";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  lay.width = static_cast<int>(w);
  lay.height = static_cast<int>(h);

  const CounterRng rng(p.seed);
  const double px_per_cm = 1.0 / p.gsd_cm;
  for (int i = 0; i < p.rows; ++i) {
    for (int j = 0; j < p.plants_per_row; ++j) {
      const auto id = static_cast<std::uint64_t>(i) * 100003ULL + static_cast<std::uint64_t>(j);
      Plant pl;
      const double jx = rng.uniform({kJitterX, id}, -1.0, 1.0) * p.jitter_frac * p.plant_spacing_cm;
      const double jy = rng.uniform({kJitterY, id}, -1.0, 1.0) * p.jitter_frac * p.plant_spacing_cm;
      pl.cx = ((j + 0.5) * p.plant_spacing_cm + jx) * px_per_cm;
      pl.cy = ((i + 0.5) * p.row_spacing_cm + jy) * px_per_cm;
      if (pl.cx < 0 || pl.cy < 0 || pl.cx >= lay.width || pl.cy >= lay.height) {
        std::ostringstream os;
        os << "plant (row " << i << ", position " << j << ") centered at (" << pl.cx << ", "
           << pl.cy << ") falls outside the " << lay.width << "x" << lay.height << " canvas";
        throw Error(ErrorCode::kInvalidArgument, os.str());
      }
      const double scale = kReferenceGsd / p.gsd_cm;
      pl.radius = 0.5 * p.mean_plant_diameter_px * scale * rng.uniform({kPlantSize, id}, 0.85, 1.15);

      const int n_leaves = 3 + static_cast<int>(rng.uniform({kLeafCount, id}) * 3.0);
      const double base = rng.uniform({kLeafBaseAngle, id}, 0.0, 2.0 * std::numbers::pi);
      for (int k = 0; k < n_leaves; ++k) {
        const auto kk = static_cast<std::uint64_t>(k);
        const double angle = base + 2.0 * std::numbers::pi * k / n_leaves +
                             rng.uniform({kLeafAngle, id, kk}, -0.3, 0.3);
        const double length = pl.radius * rng.uniform({kLeafLength, id, kk}, 0.8, 1.0);
        const double half_width = length * rng.uniform({kLeafWidth, id, kk}, 0.17, 0.22);
        Leaf leaf;
        leaf.ux = std::cos(angle);
        leaf.uy = std::sin(angle);
        leaf.half_length = 0.5 * length;
        leaf.half_width = half_width;
        leaf.cx = pl.cx + leaf.ux * leaf.half_length;
        leaf.cy = pl.cy + leaf.uy * leaf.half_length;
        pl.leaves.push_back(leaf);
      }
      pl.r = rng.uniform({kLeafColor, id, 0}, 55.0, 85.0);
      pl.g = rng.uniform({kLeafColor, id, 1}, 125.0, 160.0);
      pl.b = rng.uniform({kLeafColor, id, 2}, 30.0, 55.0);
      lay.plants.push_back(std::move(pl));
    }
  }
  return lay;
}

bool inside_ellipse(double dx, double dy, double ux, double uy, double a, double b) {
  const double u = dx * ux + dy * uy;
  const double v = -dx * uy + dy * ux;
  return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
}

}  // namespace

void validate(const SynthFieldParams& p) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (p.rows < 1 || p.plants_per_row < 1) bad("rows and plants_per_row must be >= 1");
  if (!(p.row_spacing_cm > 0) || !(p.plant_spacing_cm > 0)) bad("spacings must be > 0");
  if (!(p.gsd_cm > 0) || !std::isfinite(p.gsd_cm)) bad("gsd_cm must be > 0");
  if (!(p.mean_plant_diameter_px > 0)) bad("mean_plant_diameter_px must be > 0");
  if (!(p.jitter_frac >= 0.0 && p.jitter_frac < 0.5)) bad("jitter_frac must lie in [0, 0.5)");
  if (!(p.soil_texture_scale > 0)) bad("soil_texture_scale must be > 0");
  if (p.canvas_width_px < 0 || p.canvas_height_px < 0) bad("canvas size must be >= 0");
}

SyntheticField generate_field(const SynthFieldParams& p, const std::string& image_id,
                              const std::string& site) {
  validate(p);
  const Layout lay = plan(p);
  const int W = lay.width;
  const int H = lay.height;
  const CounterRng rng(p.seed);

  // Soil: brightness-modulated brown with two octaves of value noise,
  // anchored to ground coordinates so texture scales with the GSD.
  std::vector<double> soil(static_cast<std::size_t>(W) * H);
  const double cell = p.soil_texture_scale;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double gx = (x + 0.5) * p.gsd_cm;
      const double gy = (y + 0.5) * p.gsd_cm;
      const double n1 = value_noise(rng, 0, gx / cell, gy / cell);
      const double n2 = value_noise(rng, 1, gx * 2.7 / cell, gy * 2.7 / cell);
      soil[static_cast<std::size_t>(y) * W + x] = 1.0 + 0.22 * n1 + 0.10 * n2;
    }
  }
  if (p.shadow) {
    for (const Plant& pl : lay.plants) {
      const double sx = pl.cx + 0.35 * pl.radius;
      const double sy = pl.cy + 0.25 * pl.radius;
      const double a = 0.95 * pl.radius;
      const double b = 0.7 * pl.radius;
      const int x0 = std::max(0, static_cast<int>(std::floor(sx - a)));
      const int x1 = std::min(W - 1, static_cast<int>(std::ceil(sx + a)));
      const int y0 = std::max(0, static_cast<int>(std::floor(sy - a)));
      const int y1 = std::min(H - 1, static_cast<int>(std::ceil(sy + a)));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          if (inside_ellipse(x + 0.5 - sx, y + 0.5 - sy, 0.7071, 0.7071, a, b)) {
            double& s = soil[static_cast<std::size_t>(y) * W + x];
            s = std::min(s, 0.62);
          }
        }
      }
    }
  }

  // Plant coverage: owner index per pixel (-1 soil) and leaf shading.
  std::vector<int> owner(static_cast<std::size_t>(W) * H, -1);
  std::vector<double> shade(static_cast<std::size_t>(W) * H, 1.0);
  for (std::size_t pi = 0; pi < lay.plants.size(); ++pi) {
    const Plant& pl = lay.plants[pi];
    const double core = 0.2 * pl.radius;
    const double reach = pl.radius + 1.0;
    const int x0 = std::max(0, static_cast<int>(std::floor(pl.cx - reach)));
    const int x1 = std::min(W - 1, static_cast<int>(std::ceil(pl.cx + reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(pl.cy - reach)));
    const int y1 = std::min(H - 1, static_cast<int>(std::ceil(pl.cy + reach)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5;
        const double py = y + 0.5;
        const double dx = px - pl.cx;
        const double dy = py - pl.cy;
        bool hit = dx * dx + dy * dy <= core * core;
        for (const Leaf& lf : pl.leaves) {
          if (hit) break;
          hit = inside_ellipse(px - lf.cx, py - lf.cy, lf.ux, lf.uy, lf.half_length, lf.half_width);
        }
        if (!hit) continue;
        const std::size_t idx = static_cast<std::size_t>(y) * W + x;
        owner[idx] = static_cast<int>(pi);
        const double t = std::min(1.0, std::sqrt(dx * dx + dy * dy) / pl.radius);
        shade[idx] = 1.08 - 0.25 * t;
      }
    }
  }

  SyntheticField out;
  out.image = Raster(W, H);
  constexpr double kSoil[3] = {146.0, 112.0, 84.0};
  constexpr double kNoiseSigma = 4.0;
  std::vector<int> bx0(lay.plants.size(), W), by0(lay.plants.size(), H);
  std::vector<int> bx1(lay.plants.size(), -1), by1(lay.plants.size(), -1);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * W + x;
      double noise[3];
      sensor_noise(rng, static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y), noise);
      double rgb[3];
      if (owner[idx] >= 0) {
        const auto o = static_cast<std::size_t>(owner[idx]);
        const Plant& pl = lay.plants[o];
        rgb[0] = pl.r * shade[idx];
        rgb[1] = pl.g * shade[idx];
        rgb[2] = pl.b * shade[idx];
        bx0[o] = std::min(bx0[o], x);
        by0[o] = std::min(by0[o], y);
        bx1[o] = std::max(bx1[o], x);
        by1[o] = std::max(by1[o], y);
      } else {
        for (int c = 0; c < 3; ++c) rgb[c] = kSoil[c] * soil[idx];
      }
      out.image.set_pixel(x, y, clamp_u8(rgb[0] + kNoiseSigma * noise[0]),
                          clamp_u8(rgb[1] + kNoiseSigma * noise[1]),
                          clamp_u8(rgb[2] + kNoiseSigma * noise[2]));
    }
  }

  out.annotation.image_id = image_id;
  for (std::size_t o = 0; o < lay.plants.size(); ++o) {
    if (bx1[o] < 0) continue;  // fully hidden by a neighbour
    out.annotation.boxes.push_back({static_cast<double>(bx0[o]), static_cast<double>(by0[o]),
                                    static_cast<double>(bx1[o] + 1),
                                    static_cast<double>(by1[o] + 1)});
  }
  out.meta = ImageMeta{image_id, image_id + ".png", W, H, p.gsd_cm, site};
  return out;
}

Dataset generate_dataset(const SynthFieldParams& p, int n_plots, DatasetRole role,
                         const std::string& name, int workers) {
  if (n_plots < 1) throw Error(ErrorCode::kInvalidArgument, "n_plots must be >= 1");
  validate(p);
  std::vector<SyntheticField> fields(static_cast<std::size_t>(n_plots));
  parallel_for(fields.size(), workers, [&](std::size_t i) {
    SynthFieldParams plot = p;
    plot.seed = p.seed + i;
    char id[32];
    std::snprintf(id, sizeof(id), "plot_%03zu", i);
    fields[i] = generate_field(plot, id, i % 2 == 0 ? "synth_a" : "synth_b");
  });

  Dataset ds;
  ds.descriptor.name = name;
  ds.descriptor.role = role;
  ds.descriptor.role_label = std::string(role_to_string(role));
  for (auto& f : fields) {
    ds.descriptor.annotations.emplace(f.meta.image_id, std::move(f.annotation));
    ds.descriptor.images.push_back(std::move(f.meta));
    ds.images.push_back(std::move(f.image));
  }
  return ds;
}

}  // namespace plantres
