#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plantres/dataset.hpp"
#include "plantres/detector.hpp"
#include "plantres/metrics.hpp"
#include "plantres/resample.hpp"
#include "plantres/synthfield.hpp"

namespace plantres {

// ---------------------------------------------------------------------------
// Experiment configuration (JSON):
// {
//   "output_dir": "out",
//   "datasets":   [ {"role": "V_h", "manifest": "vh/manifest.json"},
//                   {"role": "V_h", "synth": {"n_plots": 20, "name": ..., "params": {...}}} ],
//   "transforms": [ {"source": "V_h", "target": "V_gm_h2l", "degrade": {...}},
//                   {"source": "V_l", "target": "V_bc_l2h", "bicubic": {"factor": 2}},
//                   {"source": "V_l", "target": "V_sr_l2h",
//                    "external": {"directory": "sr/", "factor": 2}} ],
//   "runs": [ {"label": "baseline", "detector": {...}, "roles": ["V_h", "V_gm_h2l"]},
//             {"label": "frcnn", "predictions": {"V_h": "preds.jsonl"}} ],
//   "eval": {...}
// }
// Relative paths resolve against the config file's directory.
// ---------------------------------------------------------------------------

struct DatasetSource {
  std::string role;
  std::filesystem::path manifest;  // empty when synthesized
  std::optional<SynthFieldParams> synth;
  int synth_plots = 1;
  std::string synth_name;
};

struct TransformSpec {
  enum class Kind { kDegrade, kBicubic, kExternal };
  Kind kind = Kind::kDegrade;
  DegradeParams degrade;
  double factor = 2.0;  // bicubic / external up-sampling factor
  std::filesystem::path directory;
};

struct TransformStep {
  std::string source_role;
  std::string target_role;
  TransformSpec spec;
};

struct DetectorRun {
  std::string label;
  std::vector<std::string> roles;
  std::optional<DetectorConfig> detector;
  std::map<std::string, std::filesystem::path> predictions;  // role -> file
};

struct ExperimentConfig {
  std::vector<DatasetSource> datasets;
  std::vector<TransformStep> transforms;
  std::vector<DetectorRun> runs;
  EvalConfig eval;
  std::filesystem::path output_dir;
  std::string config_hash;
};

ExperimentConfig parse_experiment_config(std::string_view json,
                                         const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Unique roles across datasets and transform targets; every transform
/// source and run role declared or derived earlier; each run has exactly one
/// prediction source.
void validate(const ExperimentConfig& cfg);

/// Applies one transform to a whole dataset in memory.
Dataset apply_transform(const Dataset& source, const TransformSpec& spec,
                        const std::string& target_role, int workers = 1);

/// Loads or synthesizes every declared dataset, applies the transforms in
/// order, and writes each role under output_dir/datasets/<role>/.
std::map<std::string, Dataset> build_variants(const ExperimentConfig& cfg, int workers = 1);

struct CellKey {
  std::string run_label;
  std::string role;
};

struct ExperimentReport {
  std::vector<std::pair<CellKey, MetricsReport>> cells;  // config order
  std::string config_hash;
  std::string tool_version;
  std::map<std::string, std::size_t> image_counts;  // role -> images
};

/// Builds variants, runs or ingests every detector run, evaluates each
/// (run, role) cell, and writes report.csv, provenance.json and per-cell
/// curve/profile CSVs under output_dir. Any failing cell aborts the run
/// with an error naming it.
ExperimentReport run_experiment(const ExperimentConfig& cfg, int workers = 1);

std::string report_csv(const ExperimentReport& report);
std::string provenance_json(const ExperimentReport& report);

struct VarianceEntry {
  std::string name;
  std::string role;
  double mean_variance = 0.0;  // mean over images and channels
  double distance = 0.0;       // |mean_variance - native mean_variance|
  int rank = 0;                // 1 = closest to native
};

/// Mean per-channel image variance of a dataset.
double mean_image_variance(const Dataset& ds);

/// Ranks candidates by distance of their mean variance to the native one.
/// Entries come back in rank order (ties keep input order). Candidates must
/// hold exactly the native image ids.
std::vector<VarianceEntry> compare_variance(const Dataset& native,
                                            const std::vector<Dataset>& candidates);

std::string variance_csv(const Dataset& native, const std::vector<VarianceEntry>& ranking);

/// Detector output for every image of a dataset (dataset image order).
std::vector<Prediction> detect_dataset(const Dataset& ds, const DetectorConfig& cfg,
                                       int workers = 1);

}  // namespace plantres
