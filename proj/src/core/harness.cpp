#include "plantres/harness.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "config_json.hpp"
#include "plantres/annotations.hpp"
#include "plantres/config.hpp"
#include "plantres/error.hpp"
#include "plantres/image_io.hpp"
#include "plantres/parallel.hpp"

namespace plantres {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() ? (base / path).lexically_normal() : path;
}

std::string get_string(const nlohmann::json& j, const char* key, const std::string& what) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrorCode::kConfig, what + ": '" + key + "' must be a string");
  }
  return j.at(key).get<std::string>();
}

double get_positive(const nlohmann::json& j, const char* key, const std::string& what) {
  if (!j.contains(key) || !j.at(key).is_number() || !(j.at(key).get<double>() > 0.0)) {
    throw Error(ErrorCode::kConfig, what + ": '" + key + "' must be a positive number");
  }
  return j.at(key).get<double>();
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text, const fs::path& base_dir) {
  const nlohmann::json j = detail::parse_json(text, "experiment config");
  detail::check_keys(j, {"output_dir", "datasets", "transforms", "runs", "eval"}, "experiment config");

  ExperimentConfig cfg;
  cfg.config_hash = fnv1a_hex(j.dump());
  cfg.output_dir = resolve(base_dir, j.contains("output_dir")
                                         ? get_string(j, "output_dir", "experiment config")
                                         : std::string("experiment_out"));

  if (!j.contains("datasets") || !j["datasets"].is_array() || j["datasets"].empty()) {
    throw Error(ErrorCode::kConfig, "experiment config: 'datasets' must be a non-empty array");
  }
  for (std::size_t i = 0; i < j["datasets"].size(); ++i) {
    const auto& e = j["datasets"][i];
    const std::string what = "datasets[" + std::to_string(i) + "]";
    detail::check_keys(e, {"role", "manifest", "synth"}, what);
    DatasetSource src;
    src.role = get_string(e, "role", what);
    if (e.contains("manifest") == e.contains("synth")) {
      throw Error(ErrorCode::kConfig, what + ": give exactly one of 'manifest' or 'synth'");
    }
    if (e.contains("manifest")) {
      src.manifest = resolve(base_dir, get_string(e, "manifest", what));
    } else {
      const auto& s = e["synth"];
      detail::check_keys(s, {"n_plots", "name", "params"}, what + ".synth");
      if (s.contains("n_plots")) {
        if (!s["n_plots"].is_number_integer() || s["n_plots"].get<int>() < 1) {
          throw Error(ErrorCode::kConfig, what + ".synth: n_plots must be a positive integer");
        }
        src.synth_plots = s["n_plots"].get<int>();
      }
      src.synth_name = s.contains("name") ? get_string(s, "name", what + ".synth") : src.role;
      src.synth = s.contains("params") ? detail::synth_params_from(s["params"]) : SynthFieldParams{};
    }
    cfg.datasets.push_back(std::move(src));
  }

  if (j.contains("transforms")) {
    if (!j["transforms"].is_array()) throw Error(ErrorCode::kConfig, "'transforms' must be an array");
    for (std::size_t i = 0; i < j["transforms"].size(); ++i) {
      const auto& e = j["transforms"][i];
      const std::string what = "transforms[" + std::to_string(i) + "]";
      detail::check_keys(e, {"source", "target", "degrade", "bicubic", "external"}, what);
      TransformStep step;
      step.source_role = get_string(e, "source", what);
      step.target_role = get_string(e, "target", what);
      const int kinds = e.contains("degrade") + e.contains("bicubic") + e.contains("external");
      if (kinds != 1) {
        throw Error(ErrorCode::kConfig, what + ": give exactly one of degrade / bicubic / external");
      }
      if (e.contains("degrade")) {
        step.spec.kind = TransformSpec::Kind::kDegrade;
        step.spec.degrade = detail::degrade_params_from(e["degrade"]);
      } else if (e.contains("bicubic")) {
        detail::check_keys(e["bicubic"], {"factor"}, what + ".bicubic");
        step.spec.kind = TransformSpec::Kind::kBicubic;
        step.spec.factor = get_positive(e["bicubic"], "factor", what + ".bicubic");
      } else {
        detail::check_keys(e["external"], {"directory", "factor"}, what + ".external");
        step.spec.kind = TransformSpec::Kind::kExternal;
        step.spec.directory = resolve(base_dir, get_string(e["external"], "directory", what));
        step.spec.factor = get_positive(e["external"], "factor", what + ".external");
      }
      cfg.transforms.push_back(std::move(step));
    }
  }

  if (!j.contains("runs") || !j["runs"].is_array()) {
    throw Error(ErrorCode::kConfig, "experiment config: 'runs' must be an array");
  }
  for (std::size_t i = 0; i < j["runs"].size(); ++i) {
    const auto& e = j["runs"][i];
    const std::string what = "runs[" + std::to_string(i) + "]";
    detail::check_keys(e, {"label", "roles", "detector", "predictions"}, what);
    DetectorRun run;
    run.label = get_string(e, "label", what);
    if (e.contains("detector")) run.detector = detail::detector_config_from(e["detector"]);
    if (e.contains("predictions")) {
      if (!e["predictions"].is_object()) {
        throw Error(ErrorCode::kConfig, what + ": 'predictions' maps roles to files");
      }
      for (const auto& [role, path] : e["predictions"].items()) {
        if (!path.is_string()) throw Error(ErrorCode::kConfig, what + ": prediction paths must be strings");
        run.predictions[role] = resolve(base_dir, path.get<std::string>());
      }
    }
    if (e.contains("roles")) {
      try {
        run.roles = e["roles"].get<std::vector<std::string>>();
      } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::kConfig, what + ": 'roles' must be an array of strings");
      }
    } else {
      for (const auto& [role, path] : run.predictions) run.roles.push_back(role);
    }
    cfg.runs.push_back(std::move(run));
  }

  if (j.contains("eval")) cfg.eval = detail::eval_config_from(j["eval"]);
  validate(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  return parse_experiment_config(read_file(path), path.parent_path());
}

void validate(const ExperimentConfig& cfg) {
  std::set<std::string> roles;
  for (const auto& d : cfg.datasets) {
    if (!roles.insert(d.role).second) {
      throw Error(ErrorCode::kConfig, "dataset role '" + d.role + "' declared twice");
    }
  }
  for (const auto& t : cfg.transforms) {
    if (!roles.count(t.source_role)) {
      throw Error(ErrorCode::kConfig, "transform source role '" + t.source_role + "' is not declared");
    }
    if (!roles.insert(t.target_role).second) {
      throw Error(ErrorCode::kConfig, "transform target role '" + t.target_role + "' is not unique");
    }
  }
  std::set<std::string> labels;
  for (const auto& r : cfg.runs) {
    if (r.label.empty()) throw Error(ErrorCode::kConfig, "run with empty label");
    if (!labels.insert(r.label).second) {
      throw Error(ErrorCode::kConfig, "run label '" + r.label + "' used twice");
    }
    if (r.detector.has_value() == !r.predictions.empty()) {
      throw Error(ErrorCode::kConfig,
                  "run '" + r.label + "' needs exactly one of 'detector' or 'predictions'");
    }
    if (r.roles.empty()) throw Error(ErrorCode::kConfig, "run '" + r.label + "' evaluates no roles");
    std::set<std::string> seen;
    for (const auto& role : r.roles) {
      if (!roles.count(role)) {
        throw Error(ErrorCode::kConfig,
                    "run '" + r.label + "' references undeclared role '" + role + "'");
      }
      if (!seen.insert(role).second) {
        throw Error(ErrorCode::kConfig, "run '" + r.label + "' lists role '" + role + "' twice");
      }
      if (!r.detector && !r.predictions.count(role)) {
        throw Error(ErrorCode::kConfig,
                    "run '" + r.label + "' has no predictions file for role '" + role + "'");
      }
    }
  }
}

namespace {

fs::path find_external_image(const fs::path& dir, const std::string& id) {
  for (const char* ext : {".png", ".jpg", ".jpeg", ".PNG", ".JPG", ".JPEG"}) {
    fs::path p = dir / (id + ext);
    if (fs::exists(p)) return p;
  }
  return {};
}

}  // namespace

Dataset apply_transform(const Dataset& source, const TransformSpec& spec,
                        const std::string& target_role, int workers) {
  const DatasetDescriptor& src = source.descriptor;
  if (source.images.size() != src.images.size()) {
    throw Error(ErrorCode::kInvalidArgument, "dataset image count does not match its descriptor");
  }
  Dataset out;
  out.descriptor.name = src.name + "_" + target_role;
  out.descriptor.role = role_from_string(target_role);
  out.descriptor.role_label = target_role;
  out.descriptor.images = src.images;
  out.images.resize(src.images.size());

  std::vector<std::optional<Annotation>> anns(src.images.size());
  parallel_for(src.images.size(), workers, [&](std::size_t i) {
    const ImageMeta& m = src.images[i];
    const auto it = src.annotations.find(m.image_id);
    const bool has_ann = it != src.annotations.end();
    ImageMeta& meta = out.descriptor.images[i];
    switch (spec.kind) {
      case TransformSpec::Kind::kDegrade: {
        auto [img, ann] = degrade(source.images[i], has_ann ? it->second : Annotation{m.image_id, {}},
                                  spec.degrade);
        out.images[i] = std::move(img);
        if (has_ann) anns[i] = std::move(ann);
        meta.gsd_cm = m.gsd_cm * spec.degrade.decimation_factor;
        break;
      }
      case TransformSpec::Kind::kBicubic:
        out.images[i] = bicubic_resize(source.images[i], spec.factor);
        if (has_ann) anns[i] = scale_boxes(it->second, spec.factor);
        meta.gsd_cm = m.gsd_cm / spec.factor;
        break;
      case TransformSpec::Kind::kExternal: {
        const fs::path p = find_external_image(spec.directory, m.image_id);
        if (p.empty()) {
          throw Error(ErrorCode::kIo, "external transform: no image for image_id '" + m.image_id +
                                          "' in '" + spec.directory.string() + "'");
        }
        out.images[i] = read_image(p);
        if (has_ann) anns[i] = scale_boxes(it->second, spec.factor);
        meta.gsd_cm = m.gsd_cm / spec.factor;
        meta.path = p.string();
        break;
      }
    }
    meta.width = out.images[i].width();
    meta.height = out.images[i].height();
  });
  for (std::size_t i = 0; i < anns.size(); ++i) {
    if (anns[i]) out.descriptor.annotations.emplace(src.images[i].image_id, std::move(*anns[i]));
  }
  return out;
}

std::map<std::string, Dataset> build_variants(const ExperimentConfig& cfg, int workers) {
  validate(cfg);
  std::map<std::string, Dataset> variants;
  const fs::path root = cfg.output_dir / "datasets";
  for (const auto& src : cfg.datasets) {
    Dataset ds;
    if (src.synth) {
      ds = generate_dataset(*src.synth, src.synth_plots, role_from_string(src.role), src.synth_name,
                            workers);
      ds.descriptor.role_label = src.role;
      ds.descriptor = write_dataset(ds, root / src.role, workers);
    } else {
      ds = load_dataset(src.manifest, workers);
      ds.descriptor.role_label = src.role;
      ds.descriptor.role = role_from_string(src.role);
    }
    variants.emplace(src.role, std::move(ds));
  }
  for (const auto& step : cfg.transforms) {
    Dataset ds = apply_transform(variants.at(step.source_role), step.spec, step.target_role, workers);
    ds.descriptor = write_dataset(ds, root / step.target_role, workers);
    variants.emplace(step.target_role, std::move(ds));
  }
  return variants;
}

std::vector<Prediction> detect_dataset(const Dataset& ds, const DetectorConfig& cfg, int workers) {
  validate(cfg);
  std::vector<std::vector<Prediction>> per_image(ds.images.size());
  parallel_for(ds.images.size(), workers, [&](std::size_t i) {
    per_image[i] = detect_plants(ds.images[i], cfg, ds.descriptor.images[i].image_id);
  });
  std::vector<Prediction> out;
  for (auto& v : per_image) out.insert(out.end(), v.begin(), v.end());
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, int workers) {
  ExperimentReport report;
  report.config_hash = cfg.config_hash;
  report.tool_version = kToolVersion;
  const auto variants = build_variants(cfg, workers);
  for (const auto& [role, ds] : variants) report.image_counts[role] = ds.images.size();

  for (const auto& run : cfg.runs) {
    for (const auto& role : run.roles) {
      const std::string cell = "cell (" + run.label + ", " + role + ")";
      try {
        const Dataset& ds = variants.at(role);
        std::vector<Prediction> preds;
        if (run.detector) {
          preds = detect_dataset(ds, *run.detector, workers);
        } else {
          preds = parse_predictions(read_file(run.predictions.at(role)));
        }
        MetricsReport m = evaluate(ds.descriptor, preds, cfg.eval, workers);
        const fs::path dir = cfg.output_dir / "cells" / (run.label + "__" + role);
        write_file(dir / "metrics.csv", metrics_csv_header() + metrics_csv_row(m));
        write_file(dir / "pr_curve.csv", pr_curve_csv(m.curve));
        write_file(dir / "overdetection.csv", overdetection_csv(m.overdetection));
        if (run.detector) write_file(dir / "predictions.jsonl", serialize_predictions(preds));
        report.cells.push_back({CellKey{run.label, role}, std::move(m)});
      } catch (const Error& e) {
        throw Error(e.code(), cell + ": " + e.what());
      }
    }
  }
  write_file(cfg.output_dir / "report.csv", report_csv(report));
  write_file(cfg.output_dir / "provenance.json", provenance_json(report));
  return report;
}

std::string report_csv(const ExperimentReport& report) {
  std::string out = "run_label,dataset_role,n_images,n_gt,ap,accuracy,rrmse,tp,fp,fn\n";
  for (const auto& [key, m] : report.cells) {
    out += key.run_label + "," + key.role + "," + std::to_string(m.n_images) + "," +
           std::to_string(m.n_gt) + "," + csv_number(m.ap) + "," + csv_number(m.accuracy) + "," +
           csv_number(m.rrmse) + "," + std::to_string(m.totals.tp) + "," +
           std::to_string(m.totals.fp) + "," + std::to_string(m.totals.fn) + "\n";
  }
  return out;
}

std::string provenance_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["tool_version"] = report.tool_version;
  j["config_hash"] = report.config_hash;
  j["image_counts"] = nlohmann::ordered_json::object();
  for (const auto& [role, n] : report.image_counts) j["image_counts"][role] = n;
  j["annotation_transfer"] = "derived roles reuse source annotations scaled by the transform factor";
  j["cells"] = nlohmann::ordered_json::array();
  for (const auto& [key, m] : report.cells) {
    j["cells"].push_back({{"run_label", key.run_label}, {"dataset_role", key.role}});
  }
  return j.dump(2) + "\n";
}

double mean_image_variance(const Dataset& ds) {
  if (ds.images.empty()) throw Error(ErrorCode::kUndefined, "variance of an empty dataset");
  double sum = 0.0;
  for (const Raster& img : ds.images) {
    const auto v = image_variance(img);
    sum += v[0] + v[1] + v[2];
  }
  return sum / (3.0 * static_cast<double>(ds.images.size()));
}

std::vector<VarianceEntry> compare_variance(const Dataset& native,
                                            const std::vector<Dataset>& candidates) {
  std::set<std::string> ids;
  for (const auto& m : native.descriptor.images) ids.insert(m.image_id);
  const double base = mean_image_variance(native);

  std::vector<VarianceEntry> out;
  for (const Dataset& c : candidates) {
    std::set<std::string> cids;
    for (const auto& m : c.descriptor.images) cids.insert(m.image_id);
    if (cids != ids) {
      throw Error(ErrorCode::kDanglingReference,
                  "candidate '" + c.descriptor.name + "' does not hold the native image ids");
    }
    VarianceEntry e;
    e.name = c.descriptor.name;
    e.role = c.descriptor.role_label;
    e.mean_variance = mean_image_variance(c);
    e.distance = std::abs(e.mean_variance - base);
    out.push_back(std::move(e));
  }
  std::stable_sort(out.begin(), out.end(), [](const VarianceEntry& a, const VarianceEntry& b) {
    return a.distance < b.distance;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i) + 1;
  return out;
}

std::string variance_csv(const Dataset& native, const std::vector<VarianceEntry>& ranking) {
  std::string out = "rank,dataset,role,mean_variance,distance\n";
  out += "0," + native.descriptor.name + "," + native.descriptor.role_label + "," +
         csv_number(mean_image_variance(native)) + "," + csv_number(0.0) + "\n";
  for (const auto& e : ranking) {
    out += std::to_string(e.rank) + "," + e.name + "," + e.role + "," + csv_number(e.mean_variance) +
           "," + csv_number(e.distance) + "\n";
  }
  return out;
}

}  // namespace plantres
