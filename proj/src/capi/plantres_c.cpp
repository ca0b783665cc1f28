#include "plantres/plantres.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

#include "plantres/annotations.hpp"
#include "plantres/config.hpp"
#include "plantres/dataset.hpp"
#include "plantres/detector.hpp"
#include "plantres/error.hpp"
#include "plantres/harness.hpp"
#include "plantres/metrics.hpp"
#include "plantres/resample.hpp"
#include "plantres/synthfield.hpp"

struct plantres_dataset {
  plantres::Dataset ds;
};

struct plantres_predictions {
  std::vector<plantres::Prediction> preds;
};

struct plantres_report {
  plantres::MetricsReport report;
};

struct plantres_experiment {
  plantres::ExperimentReport report;
  std::string csv;
  std::string output_dir;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
plantres_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return PLANTRES_OK;
  } catch (const plantres::Error& e) {
    g_last_error = e.what();
    return static_cast<plantres_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PLANTRES_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PLANTRES_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PLANTRES_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw plantres::Error(plantres::ErrorCode::kInvalidArgument, what);
}

plantres::SynthFieldParams to_cpp(const plantres_synth_params& p) {
  plantres::SynthFieldParams q;
  q.rows = p.rows;
  q.plants_per_row = p.plants_per_row;
  q.row_spacing_cm = p.row_spacing_cm;
  q.plant_spacing_cm = p.plant_spacing_cm;
  q.gsd_cm = p.gsd_cm;
  q.mean_plant_diameter_px = p.mean_plant_diameter_px;
  q.jitter_frac = p.jitter_frac;
  q.soil_texture_scale = p.soil_texture_scale;
  q.shadow = p.shadow != 0;
  q.seed = p.seed;
  q.canvas_width_px = p.canvas_width_px;
  q.canvas_height_px = p.canvas_height_px;
  return q;
}

plantres::DegradeParams to_cpp(const plantres_degrade_params& p) {
  return {p.gaussian_sigma, p.gaussian_window, p.motion_kernel, p.motion_angle_deg,
          p.decimation_factor};
}

plantres_degrade_params to_c(const plantres::DegradeParams& p) {
  return {p.gaussian_sigma, p.gaussian_window, p.motion_kernel, p.motion_angle_deg,
          p.decimation_factor};
}

plantres::DetectorConfig to_cpp(const plantres_detector_config& c) {
  plantres::DetectorConfig d;
  d.threshold_mode = c.threshold_mode == PLANTRES_THRESHOLD_FIXED ? plantres::ThresholdMode::kFixed
                                                                  : plantres::ThresholdMode::kOtsu;
  d.fixed_threshold = c.fixed_threshold;
  d.otsu_floor = c.otsu_floor;
  d.min_area_px = c.min_area_px;
  d.max_area_px = c.max_area_px;
  d.morph_open_radius = c.morph_open_radius;
  return d;
}

plantres_detector_config to_c(const plantres::DetectorConfig& d) {
  return {d.threshold_mode == plantres::ThresholdMode::kFixed ? PLANTRES_THRESHOLD_FIXED
                                                              : PLANTRES_THRESHOLD_OTSU,
          d.fixed_threshold, d.otsu_floor, d.min_area_px, d.max_area_px, d.morph_open_radius};
}

plantres::EvalConfig to_cpp(const plantres_eval_config& c) {
  plantres::EvalConfig e;
  e.iou_threshold = c.iou_threshold;
  e.confidence_threshold = c.confidence_threshold;
  e.recall_points = c.recall_points;
  require(c.n_bin_edges == 0 || c.bin_edges != nullptr, "bin_edges is null");
  e.overdetection_bin_edges.assign(c.bin_edges, c.bin_edges + c.n_bin_edges);
  return e;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string role_or(const char* role, const std::string& fallback) {
  return role && *role ? std::string(role) : fallback;
}

plantres_dataset* wrap(plantres::Dataset ds) { return new plantres_dataset{std::move(ds)}; }

}  // namespace

extern "C" {

const char* plantres_last_error(void) { return g_last_error.c_str(); }

const char* plantres_status_name(plantres_status status) {
  if (status == PLANTRES_OK) return "ok";
  if (status == PLANTRES_E_INTERNAL) return "internal";
  if (status >= PLANTRES_E_INVALID_ARGUMENT && status <= PLANTRES_E_CONFIG) {
    return plantres::error_code_name(static_cast<plantres::ErrorCode>(status));
  }
  return "unknown";
}

const char* plantres_version(void) { return plantres::kToolVersion; }

void plantres_string_free(char* s) { std::free(s); }

plantres_synth_params plantres_synth_params_default(void) {
  const plantres::SynthFieldParams p;
  return {p.rows,
          p.plants_per_row,
          p.row_spacing_cm,
          p.plant_spacing_cm,
          p.gsd_cm,
          p.mean_plant_diameter_px,
          p.jitter_frac,
          p.soil_texture_scale,
          p.shadow ? 1 : 0,
          p.seed,
          p.canvas_width_px,
          p.canvas_height_px};
}

plantres_degrade_params plantres_degrade_params_default(void) {
  return to_c(plantres::DegradeParams{});
}

plantres_detector_config plantres_detector_config_default(void) {
  return to_c(plantres::DetectorConfig{});
}

plantres_eval_config plantres_eval_config_default(void) {
  static const plantres::EvalConfig defaults;
  return {defaults.iou_threshold, defaults.confidence_threshold, defaults.recall_points,
          defaults.overdetection_bin_edges.data(), defaults.overdetection_bin_edges.size()};
}

plantres_status plantres_degrade_params_from_json(const char* json, plantres_degrade_params* out) {
  return guarded([&] {
    require(json && out, "null argument");
    *out = to_c(plantres::parse_degrade_params(json));
  });
}

plantres_status plantres_detector_config_from_json(const char* json,
                                                   plantres_detector_config* out) {
  return guarded([&] {
    require(json && out, "null argument");
    *out = to_c(plantres::parse_detector_config(json));
  });
}

plantres_status plantres_dataset_load(const char* manifest_path, int workers,
                                      plantres_dataset** out) {
  return guarded([&] {
    require(manifest_path && out, "null argument");
    *out = wrap(plantres::load_dataset(manifest_path, workers));
  });
}

plantres_status plantres_dataset_synthesize(const plantres_synth_params* params, int n_plots,
                                            const char* role, const char* name, int workers,
                                            plantres_dataset** out) {
  return guarded([&] {
    require(params && out, "null argument");
    require(n_plots >= 1, "n_plots must be >= 1");
    const std::string r = role_or(role, "V_h");
    auto ds = plantres::generate_dataset(to_cpp(*params), n_plots, plantres::role_from_string(r),
                                         role_or(name, "synthetic"), workers);
    ds.descriptor.role_label = r;
    *out = wrap(std::move(ds));
  });
}

plantres_status plantres_dataset_synthesize_json(const char* json, const uint64_t* seed,
                                                 int workers, plantres_dataset** out) {
  return guarded([&] {
    require(json && out, "null argument");
    plantres::SynthJob job = plantres::parse_synth_job(json);
    if (seed) job.params.seed = *seed;
    auto ds = plantres::generate_dataset(job.params, job.n_plots,
                                         plantres::role_from_string(job.role), job.name, workers);
    ds.descriptor.role_label = job.role;
    *out = wrap(std::move(ds));
  });
}

plantres_status plantres_dataset_write(plantres_dataset* ds, const char* dir, int workers) {
  return guarded([&] {
    require(ds && dir, "null argument");
    ds->ds.descriptor = plantres::write_dataset(ds->ds, dir, workers);
  });
}

size_t plantres_dataset_image_count(const plantres_dataset* ds) {
  return ds ? ds->ds.images.size() : 0;
}

size_t plantres_dataset_box_count(const plantres_dataset* ds) {
  if (!ds) return 0;
  size_t n = 0;
  for (const auto& [id, a] : ds->ds.descriptor.annotations) n += a.boxes.size();
  return n;
}

void plantres_dataset_free(plantres_dataset* ds) { delete ds; }

plantres_status plantres_dataset_degrade(const plantres_dataset* ds,
                                         const plantres_degrade_params* params,
                                         const char* target_role, int workers,
                                         plantres_dataset** out) {
  return guarded([&] {
    require(ds && params && out, "null argument");
    plantres::TransformSpec spec;
    spec.kind = plantres::TransformSpec::Kind::kDegrade;
    spec.degrade = to_cpp(*params);
    plantres::validate(spec.degrade);
    *out = wrap(plantres::apply_transform(ds->ds, spec, role_or(target_role, "V_gm_h2l"), workers));
  });
}

plantres_status plantres_dataset_bicubic(const plantres_dataset* ds, double factor,
                                         const char* target_role, int workers,
                                         plantres_dataset** out) {
  return guarded([&] {
    require(ds && out, "null argument");
    require(factor > 0.0, "factor must be positive");
    plantres::TransformSpec spec;
    spec.kind = plantres::TransformSpec::Kind::kBicubic;
    spec.factor = factor;
    *out = wrap(plantres::apply_transform(ds->ds, spec, role_or(target_role, "V_bc_l2h"), workers));
  });
}

plantres_status plantres_dataset_external(const plantres_dataset* ds, const char* directory,
                                          double factor, const char* target_role, int workers,
                                          plantres_dataset** out) {
  return guarded([&] {
    require(ds && directory && out, "null argument");
    require(factor > 0.0, "factor must be positive");
    plantres::TransformSpec spec;
    spec.kind = plantres::TransformSpec::Kind::kExternal;
    spec.factor = factor;
    spec.directory = directory;
    *out = wrap(plantres::apply_transform(ds->ds, spec, role_or(target_role, "V_sr_l2h"), workers));
  });
}

plantres_status plantres_dataset_patches(const plantres_dataset* ds, int size, int n,
                                         uint64_t seed, plantres_dataset** out) {
  return guarded([&] {
    require(ds && out, "null argument");
    const auto& src = ds->ds.descriptor;
    plantres::Dataset result;
    result.descriptor.name = src.name + "_patches";
    result.descriptor.role = src.role;
    result.descriptor.role_label = src.role_label;
    for (std::size_t i = 0; i < src.images.size(); ++i) {
      const plantres::ImageMeta& m = src.images[i];
      const auto patches = plantres::tile_patches(ds->ds.images[i], src.annotation_for(m.image_id),
                                                  size, n, seed);
      for (const auto& p : patches) {
        plantres::ImageMeta pm = m;
        pm.image_id = p.annotation.image_id;
        pm.path.clear();
        pm.width = p.image.width();
        pm.height = p.image.height();
        result.descriptor.images.push_back(pm);
        result.descriptor.annotations.emplace(pm.image_id, p.annotation);
        result.images.push_back(p.image);
      }
    }
    *out = wrap(std::move(result));
  });
}

plantres_status plantres_variance_compare(const plantres_dataset* native,
                                          const plantres_dataset* const* candidates,
                                          size_t n_candidates, char** csv_out) {
  return guarded([&] {
    require(native && csv_out && (n_candidates == 0 || candidates), "null argument");
    std::vector<plantres::Dataset> cands;
    for (size_t i = 0; i < n_candidates; ++i) {
      require(candidates[i] != nullptr, "null candidate");
      cands.push_back(candidates[i]->ds);
    }
    const auto ranking = plantres::compare_variance(native->ds, cands);
    *csv_out = dup_string(plantres::variance_csv(native->ds, ranking));
  });
}

plantres_status plantres_detect(const plantres_dataset* ds, const plantres_detector_config* config,
                                int workers, plantres_predictions** out) {
  return guarded([&] {
    require(ds && config && out, "null argument");
    auto preds = plantres::detect_dataset(ds->ds, to_cpp(*config), workers);
    *out = new plantres_predictions{std::move(preds)};
  });
}

plantres_status plantres_predictions_load(const char* path, plantres_predictions** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto preds = plantres::parse_predictions(plantres::read_file(path));
    *out = new plantres_predictions{std::move(preds)};
  });
}

plantres_status plantres_predictions_save(const plantres_predictions* preds, const char* path) {
  return guarded([&] {
    require(preds && path, "null argument");
    plantres::write_file(path, plantres::serialize_predictions(preds->preds));
  });
}

size_t plantres_predictions_count(const plantres_predictions* preds) {
  return preds ? preds->preds.size() : 0;
}

void plantres_predictions_free(plantres_predictions* preds) { delete preds; }

plantres_status plantres_evaluate(const plantres_dataset* ds, const plantres_predictions* preds,
                                  const plantres_eval_config* config, int workers,
                                  plantres_report** out) {
  return guarded([&] {
    require(ds && preds && config && out, "null argument");
    auto r = plantres::evaluate(ds->ds.descriptor, preds->preds, to_cpp(*config), workers);
    *out = new plantres_report{std::move(r)};
  });
}

plantres_status plantres_evaluate_json(const plantres_dataset* ds, const plantres_predictions* preds,
                                       const char* config_json, int workers,
                                       plantres_report** out) {
  return guarded([&] {
    require(ds && preds && out, "null argument");
    const plantres::EvalConfig cfg = config_json && *config_json
                                         ? plantres::parse_eval_config(config_json)
                                         : plantres::EvalConfig{};
    auto r = plantres::evaluate(ds->ds.descriptor, preds->preds, cfg, workers);
    *out = new plantres_report{std::move(r)};
  });
}

plantres_status plantres_report_metrics(const plantres_report* report, plantres_metrics* out) {
  return guarded([&] {
    require(report && out, "null argument");
    const auto& r = report->report;
    *out = {r.n_images,   r.n_gt,         r.ap,          r.accuracy,
            r.rrmse,      r.totals.tp,    r.totals.fp,   r.totals.fn};
  });
}

plantres_status plantres_report_write(const plantres_report* report, const char* dir) {
  return guarded([&] {
    require(report && dir, "null argument");
    const std::filesystem::path d(dir);
    const auto& r = report->report;
    plantres::write_file(d / "metrics.csv", plantres::metrics_csv_header() + plantres::metrics_csv_row(r));
    plantres::write_file(d / "pr_curve.csv", plantres::pr_curve_csv(r.curve));
    plantres::write_file(d / "overdetection.csv", plantres::overdetection_csv(r.overdetection));
  });
}

void plantres_report_free(plantres_report* report) { delete report; }

plantres_status plantres_experiment_run(const char* config_path, const char* output_dir,
                                        int workers, plantres_experiment** out) {
  return guarded([&] {
    require(config_path && out, "null argument");
    plantres::ExperimentConfig cfg = plantres::load_experiment_config(config_path);
    if (output_dir && *output_dir) cfg.output_dir = output_dir;
    auto exp = std::make_unique<plantres_experiment>();
    exp->report = plantres::run_experiment(cfg, workers);
    exp->csv = plantres::report_csv(exp->report);
    exp->output_dir = cfg.output_dir.string();
    *out = exp.release();
  });
}

const char* plantres_experiment_report_csv(const plantres_experiment* exp) {
  return exp ? exp->csv.c_str() : "";
}

const char* plantres_experiment_output_dir(const plantres_experiment* exp) {
  return exp ? exp->output_dir.c_str() : "";
}

size_t plantres_experiment_cell_count(const plantres_experiment* exp) {
  return exp ? exp->report.cells.size() : 0;
}

void plantres_experiment_free(plantres_experiment* exp) { delete exp; }

}  // extern "C"
