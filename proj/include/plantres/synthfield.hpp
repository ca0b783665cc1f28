#pragma once

#include <cstdint>
#include <string>

#include "plantres/dataset.hpp"
#include "plantres/raster.hpp"
#include "plantres/types.hpp"

namespace plantres {

/// Synthetic maize microplot. Plants sit on a rows x plants_per_row grid
/// (rows run along x); sizes are in cm except where noted.
struct SynthFieldParams {
  int rows = 4;
  int plants_per_row = 6;
  double row_spacing_cm = 45.0;
  double plant_spacing_cm = 20.0;
  double gsd_cm = 0.3;
  // Plant diameter in pixels at the reference GSD of 0.3 cm.
  double mean_plant_diameter_px = 40.0;
  double jitter_frac = 0.08;
  // Feature size of the soil texture, cm.
  double soil_texture_scale = 3.0;
  bool shadow = true;
  std::uint64_t seed = 1;
  // 0 derives the canvas from the grid.
  int canvas_width_px = 0;
  int canvas_height_px = 0;
};

void validate(const SynthFieldParams& p);

struct SyntheticField {
  Raster image;
  Annotation annotation;
  ImageMeta meta;
};

/// Renders textured soil, optional ground shadows, and one rosette of 3-5
/// elliptical leaves per plant. Each gt box is the tight box of the plant's
/// visible green pixels. Output is a pure function of the parameters.
SyntheticField generate_field(const SynthFieldParams& p, const std::string& image_id = "plot_000",
                              const std::string& site = "synth_a");

/// n_plots fields with seeds seed + i; sites alternate synth_a / synth_b.
Dataset generate_dataset(const SynthFieldParams& p, int n_plots, DatasetRole role,
                         const std::string& name = "synthetic", int workers = 1);

}  // namespace plantres
