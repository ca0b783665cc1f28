#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "plantres/detector.hpp"
#include "plantres/metrics.hpp"
#include "plantres/resample.hpp"
#include "plantres/synthfield.hpp"

namespace plantres {

inline constexpr const char* kToolVersion = "plantres 0.1.0";

// JSON objects whose keys are the struct field names; omitted keys keep
// their defaults, unknown keys are rejected with Error(kConfig).
SynthFieldParams parse_synth_params(std::string_view json);
DegradeParams parse_degrade_params(std::string_view json);
DetectorConfig parse_detector_config(std::string_view json);
EvalConfig parse_eval_config(std::string_view json);

/// Settings for the `synth` subcommand:
/// {"name", "role", "n_plots", "params": {...}}.
struct SynthJob {
  std::string name = "synthetic";
  std::string role = "V_h";
  int n_plots = 1;
  SynthFieldParams params;
};
SynthJob parse_synth_job(std::string_view json);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);

}  // namespace plantres
