#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plantres/plantres.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Failure {
  int exit_code;
};

int exit_code_for(plantres_status s) {
  switch (s) {
    case PLANTRES_OK:
      return kExitOk;
    case PLANTRES_E_CONFIG:
    case PLANTRES_E_INVALID_ARGUMENT:
      return kExitUsage;
    default:
      return kExitData;
  }
}

void check(plantres_status s) {
  if (s == PLANTRES_OK) return;
  std::cerr << "error [" << plantres_status_name(s) << "]: " << plantres_last_error() << "\n";
  throw Failure{exit_code_for(s)};
}

void usage_error(const std::string& msg) {
  std::cerr << "error [usage]: " << msg << "\n";
  throw Failure{kExitUsage};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) usage_error("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

template <typename T, void (*Free)(T*)>
struct Owned {
  T* p = nullptr;
  Owned() = default;
  Owned(const Owned&) = delete;
  Owned& operator=(const Owned&) = delete;
  Owned(Owned&& o) noexcept : p(o.p) { o.p = nullptr; }
  ~Owned() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using DatasetPtr = Owned<plantres_dataset, plantres_dataset_free>;
using PredictionsPtr = Owned<plantres_predictions, plantres_predictions_free>;
using ReportPtr = Owned<plantres_report, plantres_report_free>;
using ExperimentPtr = Owned<plantres_experiment, plantres_experiment_free>;

DatasetPtr load(const std::string& manifest, int workers) {
  DatasetPtr ds;
  check(plantres_dataset_load(manifest.c_str(), workers, ds.out()));
  return ds;
}

struct Options {
  std::string config;
  std::string out;
  int workers = 1;
  std::optional<std::uint64_t> seed;
  std::string manifest;
  std::string predictions;
  std::string kind = "degrade";
  double factor = 2.0;
  std::string source_dir;
  std::string role;
  int size = 256;
  int count = 1;
  std::vector<std::string> candidates;
};

void add_common(CLI::App* cmd, Options& o, bool out_required) {
  auto* out = cmd->add_option("--out", o.out, "Output path");
  if (out_required) out->required();
  cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
}

int run_synth(const Options& o) {
  if (o.config.empty()) usage_error("synth needs --config");
  const std::string json = slurp(o.config);
  DatasetPtr ds;
  const std::uint64_t seed = o.seed.value_or(0);
  check(plantres_dataset_synthesize_json(json.c_str(), o.seed ? &seed : nullptr, o.workers,
                                         ds.out()));
  check(plantres_dataset_write(ds.get(), o.out.c_str(), o.workers));
  std::cout << "wrote " << plantres_dataset_image_count(ds.get()) << " images, "
            << plantres_dataset_box_count(ds.get()) << " boxes to " << o.out << "\n";
  return kExitOk;
}

int run_transform(const Options& o) {
  DatasetPtr src = load(o.manifest, o.workers);
  DatasetPtr dst;
  const char* role = o.role.empty() ? nullptr : o.role.c_str();
  if (o.kind == "degrade") {
    plantres_degrade_params p = plantres_degrade_params_default();
    if (!o.config.empty()) check(plantres_degrade_params_from_json(slurp(o.config).c_str(), &p));
    check(plantres_dataset_degrade(src.get(), &p, role, o.workers, dst.out()));
  } else if (o.kind == "bicubic") {
    check(plantres_dataset_bicubic(src.get(), o.factor, role, o.workers, dst.out()));
  } else if (o.kind == "external") {
    if (o.source_dir.empty()) usage_error("--kind external needs --source-dir");
    check(plantres_dataset_external(src.get(), o.source_dir.c_str(), o.factor, role, o.workers,
                                    dst.out()));
  } else {
    usage_error("--kind must be degrade, bicubic or external");
  }
  check(plantres_dataset_write(dst.get(), o.out.c_str(), o.workers));
  std::cout << "wrote " << plantres_dataset_image_count(dst.get()) << " images to " << o.out
            << "\n";
  return kExitOk;
}

int run_detect(const Options& o) {
  plantres_detector_config cfg = plantres_detector_config_default();
  if (!o.config.empty()) check(plantres_detector_config_from_json(slurp(o.config).c_str(), &cfg));
  DatasetPtr ds = load(o.manifest, o.workers);
  PredictionsPtr preds;
  check(plantres_detect(ds.get(), &cfg, o.workers, preds.out()));
  check(plantres_predictions_save(preds.get(), o.out.c_str()));
  std::cout << "wrote " << plantres_predictions_count(preds.get()) << " detections to " << o.out
            << "\n";
  return kExitOk;
}

int run_patches(const Options& o) {
  DatasetPtr ds = load(o.manifest, o.workers);
  DatasetPtr patches;
  check(plantres_dataset_patches(ds.get(), o.size, o.count, o.seed.value_or(0), patches.out()));
  check(plantres_dataset_write(patches.get(), o.out.c_str(), o.workers));
  std::cout << "wrote " << plantres_dataset_image_count(patches.get()) << " patches to " << o.out
            << "\n";
  return kExitOk;
}

int run_evaluate(const Options& o) {
  const std::string cfg = o.config.empty() ? std::string() : slurp(o.config);
  DatasetPtr ds = load(o.manifest, o.workers);
  PredictionsPtr preds;
  check(plantres_predictions_load(o.predictions.c_str(), preds.out()));
  ReportPtr report;
  check(plantres_evaluate_json(ds.get(), preds.get(), cfg.c_str(), o.workers, report.out()));
  if (!o.out.empty()) check(plantres_report_write(report.get(), o.out.c_str()));
  plantres_metrics m;
  check(plantres_report_metrics(report.get(), &m));
  std::printf("images=%zu gt=%zu ap=%.6f accuracy=%.6f rrmse=%.6f tp=%zu fp=%zu fn=%zu\n",
              m.n_images, m.n_gt, m.ap, m.accuracy, m.rrmse, m.tp, m.fp, m.fn);
  return kExitOk;
}

int run_report(const Options& o) {
  if (o.config.empty()) usage_error("report needs --config");
  ExperimentPtr exp;
  check(plantres_experiment_run(o.config.c_str(), o.out.empty() ? nullptr : o.out.c_str(),
                                o.workers, exp.out()));
  std::cout << plantres_experiment_report_csv(exp.get());
  std::cerr << "wrote " << plantres_experiment_cell_count(exp.get()) << " cells to "
            << plantres_experiment_output_dir(exp.get()) << "\n";
  return kExitOk;
}

int run_variance(const Options& o) {
  if (o.candidates.empty()) usage_error("variance needs at least one --candidate");
  DatasetPtr native = load(o.manifest, o.workers);
  std::vector<DatasetPtr> cands;
  std::vector<const plantres_dataset*> raw;
  for (const auto& c : o.candidates) {
    cands.push_back(load(c, o.workers));
    raw.push_back(cands.back().get());
  }
  char* csv = nullptr;
  check(plantres_variance_compare(native.get(), raw.data(), raw.size(), &csv));
  const std::string text(csv);
  plantres_string_free(csv);
  if (o.out.empty()) {
    std::cout << text;
  } else if (!write_text(o.out, text)) {
    std::cerr << "error [io]: cannot write '" << o.out << "'\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plant detection resolution study toolkit"};
  app.set_version_flag("--version", plantres_version());
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic annotated field dataset");
  synth->add_option("--config", o.config, "Synth job JSON")->required();
  synth->add_option("--seed", o.seed, "Override the base seed");
  add_common(synth, o, true);

  auto* transform = app.add_subcommand("transform", "Derive a dataset at another resolution");
  transform->add_option("--manifest", o.manifest, "Source manifest")->required();
  transform->add_option("--kind", o.kind, "degrade | bicubic | external")
      ->check(CLI::IsMember({"degrade", "bicubic", "external"}));
  transform->add_option("--config", o.config, "Degradation parameters JSON");
  transform->add_option("--factor", o.factor, "Up-sampling factor")->check(CLI::PositiveNumber);
  transform->add_option("--source-dir", o.source_dir, "Directory of externally up-sampled images");
  transform->add_option("--role", o.role, "Role label of the derived dataset");
  add_common(transform, o, true);

  auto* detect = app.add_subcommand("detect", "Run the baseline detector over a dataset");
  detect->add_option("--manifest", o.manifest, "Dataset manifest")->required();
  detect->add_option("--config", o.config, "Detector config JSON");
  add_common(detect, o, true);

  auto* patches = app.add_subcommand("patches", "Cut fixed-size training patches");
  patches->add_option("--manifest", o.manifest, "Dataset manifest")->required();
  patches->add_option("--size", o.size, "Patch side in pixels")->check(CLI::PositiveNumber);
  patches->add_option("--count", o.count, "Patches per image")->check(CLI::PositiveNumber);
  patches->add_option("--seed", o.seed, "Sampling seed");
  add_common(patches, o, true);

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against a dataset");
  evaluate->add_option("--manifest", o.manifest, "Dataset manifest")->required();
  evaluate->add_option("--predictions", o.predictions, "Predictions JSONL")->required();
  evaluate->add_option("--config", o.config, "Evaluation config JSON");
  add_common(evaluate, o, false);

  auto* report = app.add_subcommand("report", "Run an experiment config end to end");
  report->add_option("--config", o.config, "Experiment config JSON")->required();
  add_common(report, o, false);

  auto* variance = app.add_subcommand("variance", "Rank datasets by image-variance closeness");
  variance->add_option("--manifest", o.manifest, "Native dataset manifest")->required();
  variance->add_option("--candidate", o.candidates, "Candidate dataset manifest (repeatable)");
  add_common(variance, o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) return run_synth(o);
    if (*transform) return run_transform(o);
    if (*detect) return run_detect(o);
    if (*patches) return run_patches(o);
    if (*evaluate) return run_evaluate(o);
    if (*report) return run_report(o);
    if (*variance) return run_variance(o);
  } catch (const Failure& f) {
    return f.exit_code;
  }
  return kExitUsage;
}
