#include "plantres/config.hpp"

#include <cstdio>

#include "config_json.hpp"
#include "plantres/error.hpp"

namespace plantres {

namespace detail {

nlohmann::json parse_json(std::string_view text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfig, what + ": " + e.what());
  }
}

void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                const std::string& what) {
  if (!obj.is_object()) throw Error(ErrorCode::kConfig, what + ": expected a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::kConfig, what + ": unknown key '" + key + "'");
  }
}

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& what) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, what + "." + key + ": " + e.what());
  }
}

}  // namespace

SynthFieldParams synth_params_from(const nlohmann::json& j) {
  const std::string w = "synth params";
  check_keys(j,
             {"rows", "plants_per_row", "row_spacing_cm", "plant_spacing_cm", "gsd_cm",
              "mean_plant_diameter_px", "jitter_frac", "soil_texture_scale", "shadow", "seed",
              "canvas_width_px", "canvas_height_px"},
             w);
  SynthFieldParams p;
  read(j, "rows", p.rows, w);
  read(j, "plants_per_row", p.plants_per_row, w);
  read(j, "row_spacing_cm", p.row_spacing_cm, w);
  read(j, "plant_spacing_cm", p.plant_spacing_cm, w);
  read(j, "gsd_cm", p.gsd_cm, w);
  read(j, "mean_plant_diameter_px", p.mean_plant_diameter_px, w);
  read(j, "jitter_frac", p.jitter_frac, w);
  read(j, "soil_texture_scale", p.soil_texture_scale, w);
  read(j, "shadow", p.shadow, w);
  read(j, "seed", p.seed, w);
  read(j, "canvas_width_px", p.canvas_width_px, w);
  read(j, "canvas_height_px", p.canvas_height_px, w);
  try {
    validate(p);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, w + ": " + e.what());
  }
  return p;
}

DegradeParams degrade_params_from(const nlohmann::json& j) {
  const std::string w = "degrade params";
  check_keys(j,
             {"gaussian_sigma", "gaussian_window", "motion_kernel", "motion_angle_deg",
              "decimation_factor"},
             w);
  DegradeParams p;
  read(j, "gaussian_sigma", p.gaussian_sigma, w);
  read(j, "gaussian_window", p.gaussian_window, w);
  read(j, "motion_kernel", p.motion_kernel, w);
  read(j, "motion_angle_deg", p.motion_angle_deg, w);
  read(j, "decimation_factor", p.decimation_factor, w);
  try {
    validate(p);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, w + ": " + e.what());
  }
  return p;
}

DetectorConfig detector_config_from(const nlohmann::json& j) {
  const std::string w = "detector config";
  check_keys(j,
             {"threshold_mode", "fixed_threshold", "otsu_floor", "min_area_px", "max_area_px",
              "morph_open_radius"},
             w);
  DetectorConfig c;
  std::string mode = "otsu";
  read(j, "threshold_mode", mode, w);
  if (mode == "otsu") {
    c.threshold_mode = ThresholdMode::kOtsu;
  } else if (mode == "fixed") {
    c.threshold_mode = ThresholdMode::kFixed;
  } else {
    throw Error(ErrorCode::kConfig, w + ": threshold_mode must be \"otsu\" or \"fixed\"");
  }
  read(j, "fixed_threshold", c.fixed_threshold, w);
  read(j, "otsu_floor", c.otsu_floor, w);
  read(j, "min_area_px", c.min_area_px, w);
  read(j, "max_area_px", c.max_area_px, w);
  read(j, "morph_open_radius", c.morph_open_radius, w);
  try {
    validate(c);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, w + ": " + e.what());
  }
  return c;
}

EvalConfig eval_config_from(const nlohmann::json& j) {
  const std::string w = "eval config";
  check_keys(j, {"iou_threshold", "confidence_threshold", "recall_points", "overdetection_bin_edges"},
             w);
  EvalConfig c;
  read(j, "iou_threshold", c.iou_threshold, w);
  read(j, "confidence_threshold", c.confidence_threshold, w);
  read(j, "recall_points", c.recall_points, w);
  read(j, "overdetection_bin_edges", c.overdetection_bin_edges, w);
  if (!(c.iou_threshold >= 0.0 && c.iou_threshold <= 1.0) ||
      !(c.confidence_threshold >= 0.0 && c.confidence_threshold <= 1.0)) {
    throw Error(ErrorCode::kConfig, w + ": thresholds must lie in [0, 1]");
  }
  if (c.recall_points < 2) throw Error(ErrorCode::kConfig, w + ": recall_points must be >= 2");
  for (std::size_t i = 1; i < c.overdetection_bin_edges.size(); ++i) {
    if (!(c.overdetection_bin_edges[i] > c.overdetection_bin_edges[i - 1])) {
      throw Error(ErrorCode::kConfig, w + ": overdetection_bin_edges must be strictly increasing");
    }
  }
  return c;
}

}  // namespace detail

SynthFieldParams parse_synth_params(std::string_view json) {
  return detail::synth_params_from(detail::parse_json(json, "synth params"));
}

DegradeParams parse_degrade_params(std::string_view json) {
  return detail::degrade_params_from(detail::parse_json(json, "degrade params"));
}

DetectorConfig parse_detector_config(std::string_view json) {
  return detail::detector_config_from(detail::parse_json(json, "detector config"));
}

EvalConfig parse_eval_config(std::string_view json) {
  return detail::eval_config_from(detail::parse_json(json, "eval config"));
}

SynthJob parse_synth_job(std::string_view json) {
  const auto j = detail::parse_json(json, "synth config");
  detail::check_keys(j, {"name", "role", "n_plots", "params"}, "synth config");
  SynthJob job;
  try {
    if (j.contains("name")) job.name = j.at("name").get<std::string>();
    if (j.contains("role")) job.role = j.at("role").get<std::string>();
    if (j.contains("n_plots")) job.n_plots = j.at("n_plots").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("synth config: ") + e.what());
  }
  if (job.n_plots < 1) throw Error(ErrorCode::kConfig, "synth config: n_plots must be >= 1");
  if (j.contains("params")) job.params = detail::synth_params_from(j.at("params"));
  return job;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace plantres
