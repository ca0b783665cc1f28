#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "expect_error.hpp"
#include "plantres/annotations.hpp"
#include "plantres/config.hpp"
#include "plantres/harness.hpp"
#include "plantres/image_io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using plantres::ErrorCode;
using testing_support::TempDir;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

plantres::SynthFieldParams small_params(std::uint64_t seed = 5) {
  plantres::SynthFieldParams p;
  p.rows = 2;
  p.plants_per_row = 3;
  p.seed = seed;
  return p;
}

const char* kSynthExperiment = R"({
  "output_dir": "out",
  "datasets": [{"role": "V_h", "synth": {"n_plots": 3, "name": "field",
                "params": {"rows": 2, "plants_per_row": 3, "seed": 40}}}],
  "transforms": [
    {"source": "V_h", "target": "V_gm_h2l", "degrade": {}},
    {"source": "V_gm_h2l", "target": "V_bc_l2h", "bicubic": {"factor": 2}}
  ],
  "runs": [
    {"label": "hr", "detector": {}, "roles": ["V_h", "V_gm_h2l", "V_bc_l2h"]},
    {"label": "lr", "detector": {"min_area_px": 30, "max_area_px": 375}, "roles": ["V_gm_h2l"]}
  ]
})";

}  // namespace

TEST(ExperimentConfig, ParsesAndResolvesPaths) {
  const auto cfg = plantres::parse_experiment_config(R"({
    "datasets": [{"role": "V_l", "manifest": "vl/manifest.json"}],
    "transforms": [{"source": "V_l", "target": "V_sr_l2h",
                    "external": {"directory": "sr", "factor": 4}}],
    "runs": [{"label": "f", "predictions": {"V_l": "p.jsonl", "V_sr_l2h": "/abs/q.jsonl"}}],
    "eval": {"iou_threshold": 0.5}
  })", "/base");
  EXPECT_EQ(cfg.output_dir, fs::path("/base/experiment_out"));
  EXPECT_EQ(cfg.datasets[0].manifest, fs::path("/base/vl/manifest.json"));
  EXPECT_EQ(cfg.transforms[0].spec.kind, plantres::TransformSpec::Kind::kExternal);
  EXPECT_EQ(cfg.transforms[0].spec.directory, fs::path("/base/sr"));
  EXPECT_DOUBLE_EQ(cfg.transforms[0].spec.factor, 4.0);
  EXPECT_EQ(cfg.runs[0].roles, (std::vector<std::string>{"V_l", "V_sr_l2h"}));
  EXPECT_EQ(cfg.runs[0].predictions.at("V_sr_l2h"), fs::path("/abs/q.jsonl"));
  EXPECT_DOUBLE_EQ(cfg.eval.iou_threshold, 0.5);
  EXPECT_EQ(cfg.config_hash.size(), 16u);
}

TEST(ExperimentConfig, HashIgnoresKeyOrderAndWhitespace) {
  const auto a = plantres::parse_experiment_config(
      R"({"datasets": [{"role": "V_h", "manifest": "m.json"}], "runs": []})", "/");
  const auto b = plantres::parse_experiment_config(
      R"({ "runs":[],"datasets":[{"manifest":"m.json","role":"V_h"}] })", "/");
  const auto c = plantres::parse_experiment_config(
      R"({"datasets": [{"role": "V_h", "manifest": "n.json"}], "runs": []})", "/");
  EXPECT_EQ(a.config_hash, b.config_hash);
  EXPECT_NE(a.config_hash, c.config_hash);
}

TEST(ExperimentConfig, RejectsMalformedAndInconsistentConfigs) {
  const auto bad = [](const std::string& json, const std::string& needle) {
    EXPECT_PLANTRES_ERROR(plantres::parse_experiment_config(json, "/"), ErrorCode::kConfig, needle);
  };
  bad("{", "");
  bad(R"({"datasets": []})", "datasets");
  bad(R"({"datasets": [{"role": "V_h", "manifest": "m"}], "extra": 1})", "extra");
  bad(R"({"datasets": [{"role": "V_h"}]})", "exactly one");
  bad(R"({"datasets": [{"role": "V_h", "manifest": "a"}, {"role": "V_h", "manifest": "b"}],
          "runs": []})",
      "declared twice");
  bad(R"({"datasets": [{"role": "V_h", "manifest": "a"}],
          "transforms": [{"source": "V_l", "target": "V_bc_l2h", "bicubic": {"factor": 2}}],
          "runs": []})",
      "not declared");
  bad(R"({"datasets": [{"role": "V_h", "manifest": "a"}],
          "transforms": [{"source": "V_h", "target": "V_h", "degrade": {}}], "runs": []})",
      "not unique");
  bad(R"({"datasets": [{"role": "V_h", "manifest": "a"}],
          "transforms": [{"source": "V_h", "target": "x", "degrade": {}, "bicubic": {}}]})",
      "exactly one");
  bad(R"({"datasets": [{"role": "V_h", "manifest": "a"}],
          "runs": [{"label": "r", "detector": {}, "roles": ["V_l"]}]})",
      "undeclared role 'V_l'");
  bad(R"({"datasets": [{"role": "V_h", "manifest": "a"}],
          "runs": [{"label": "r", "detector": {}, "predictions": {"V_h": "p"}}]})",
      "exactly one");
  bad(R"({"datasets": [{"role": "V_h", "manifest": "a"}],
          "runs": [{"label": "r", "predictions": {"V_h": "p"}, "roles": ["V_h", "V_l"]}]})",
      "V_l");
  bad(R"({"datasets": [{"role": "V_h", "manifest": "a"}],
          "runs": [{"label": "r", "detector": {}, "roles": ["V_h"]},
                   {"label": "r", "detector": {}, "roles": ["V_h"]}]})",
      "used twice");
  bad(R"({"datasets": [{"role": "V_h", "manifest": "a"}],
          "runs": [{"label": "r", "detector": {"bogus": 1}, "roles": ["V_h"]}]})",
      "bogus");
}

TEST(Transform, MetadataFollowsTheScale) {
  const auto src = plantres::generate_dataset(small_params(), 2, plantres::DatasetRole::kValHigh,
                                              "field");
  const auto lo = plantres::apply_transform(src, {}, "V_gm_h2l");
  plantres::TransformSpec up;
  up.kind = plantres::TransformSpec::Kind::kBicubic;
  up.factor = 2;
  const auto back = plantres::apply_transform(lo, up, "V_bc_l2h");

  EXPECT_EQ(lo.descriptor.role, plantres::DatasetRole::kValDegraded);
  EXPECT_EQ(lo.descriptor.name, "field_V_gm_h2l");
  for (std::size_t i = 0; i < src.images.size(); ++i) {
    const auto& s = src.descriptor.images[i];
    const auto& l = lo.descriptor.images[i];
    const auto& b = back.descriptor.images[i];
    EXPECT_EQ(l.image_id, s.image_id);
    EXPECT_DOUBLE_EQ(l.gsd_cm / s.gsd_cm, 2.0);
    EXPECT_DOUBLE_EQ(b.gsd_cm / l.gsd_cm, 0.5);
    EXPECT_EQ(l.width, s.width / 2);
    EXPECT_EQ(lo.images[i].width(), l.width);
    EXPECT_EQ(b.width, 2 * l.width);
    EXPECT_EQ(lo.descriptor.annotation_for(l.image_id).boxes.size(),
              src.descriptor.annotation_for(s.image_id).boxes.size());
  }
}

TEST(Transform, ExternalPairsByImageId) {
  TempDir tmp;
  const auto src = plantres::generate_dataset(small_params(), 2, plantres::DatasetRole::kValLow);
  plantres::TransformSpec spec;
  spec.kind = plantres::TransformSpec::Kind::kExternal;
  spec.factor = 2;
  spec.directory = tmp.path();
  const auto& id0 = src.descriptor.images[0].image_id;
  const auto& id1 = src.descriptor.images[1].image_id;
  plantres::write_png(tmp / (id0 + ".png"), plantres::bicubic_resize(src.images[0], 2));
  EXPECT_PLANTRES_ERROR(plantres::apply_transform(src, spec, "V_sr_l2h"), ErrorCode::kIo, id1);

  plantres::write_png(tmp / (id1 + ".png"), plantres::bicubic_resize(src.images[1], 2));
  const auto sr = plantres::apply_transform(src, spec, "V_sr_l2h");
  EXPECT_EQ(sr.descriptor.role, plantres::DatasetRole::kValSuperResolved);
  EXPECT_EQ(sr.images[1].width(), 2 * src.images[1].width());
  EXPECT_DOUBLE_EQ(sr.descriptor.images[1].gsd_cm, src.descriptor.images[1].gsd_cm / 2);
  const auto a = src.descriptor.annotation_for(id1).boxes.at(0);
  const auto b = sr.descriptor.annotation_for(id1).boxes.at(0);
  EXPECT_DOUBLE_EQ(b.x_max, 2 * a.x_max);
}

TEST(Dataset, WriteLoadRoundTrip) {
  TempDir tmp;
  const auto ds = plantres::generate_dataset(small_params(), 3, plantres::DatasetRole::kValHigh,
                                             "rt");
  plantres::write_dataset(ds, tmp / "d");
  const auto back = plantres::load_dataset(tmp / "d" / "manifest.json");
  EXPECT_EQ(back.descriptor.name, "rt");
  EXPECT_EQ(back.descriptor.role, plantres::DatasetRole::kValHigh);
  ASSERT_EQ(back.images.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& id = ds.descriptor.images[i].image_id;
    EXPECT_EQ(back.descriptor.images[i].image_id, id);
    EXPECT_DOUBLE_EQ(back.descriptor.images[i].gsd_cm, ds.descriptor.images[i].gsd_cm);
    EXPECT_EQ(back.descriptor.images[i].site, ds.descriptor.images[i].site);
    EXPECT_TRUE(back.images[i] == ds.images[i]);
    EXPECT_EQ(back.descriptor.annotation_for(id), ds.descriptor.annotation_for(id));
  }
}

TEST(Experiment, EveryCellIsReported) {
  TempDir tmp;
  write_text(tmp / "exp.json", kSynthExperiment);
  const auto cfg = plantres::load_experiment_config(tmp / "exp.json");
  const auto rep = plantres::run_experiment(cfg, 2);

  ASSERT_EQ(rep.cells.size(), 4u);
  EXPECT_EQ(rep.cells[0].first.run_label, "hr");
  EXPECT_EQ(rep.cells[3].first.run_label, "lr");
  EXPECT_EQ(rep.image_counts.at("V_bc_l2h"), 3u);
  for (const auto& [key, m] : rep.cells) {
    EXPECT_EQ(m.n_images, 3u);
    const fs::path cell = tmp / "out" / "cells" / (key.run_label + "__" + key.role);
    for (const char* f : {"metrics.csv", "pr_curve.csv", "overdetection.csv", "predictions.jsonl"}) {
      EXPECT_TRUE(fs::exists(cell / f)) << cell / f;
    }
  }
  for (const char* role : {"V_h", "V_gm_h2l", "V_bc_l2h"}) {
    EXPECT_TRUE(fs::exists(tmp / "out" / "datasets" / role / "manifest.json"));
  }

  const std::string csv = read_text(tmp / "out" / "report.csv");
  EXPECT_EQ(csv, plantres::report_csv(rep));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "run_label,dataset_role,n_images,n_gt,ap,accuracy,rrmse,tp,fp,fn");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);

  const std::string prov = read_text(tmp / "out" / "provenance.json");
  EXPECT_NE(prov.find(cfg.config_hash), std::string::npos);
  EXPECT_NE(prov.find(plantres::kToolVersion), std::string::npos);
}

TEST(Experiment, ReportIsIndependentOfWorkerCount) {
  TempDir tmp;
  write_text(tmp / "exp.json", kSynthExperiment);
  auto cfg = plantres::load_experiment_config(tmp / "exp.json");
  cfg.output_dir = tmp / "a";
  const std::string one = plantres::report_csv(plantres::run_experiment(cfg, 1));
  cfg.output_dir = tmp / "b";
  const std::string four = plantres::report_csv(plantres::run_experiment(cfg, 4));
  EXPECT_EQ(one, four);
  EXPECT_EQ(read_text(tmp / "a" / "cells" / "hr__V_h" / "pr_curve.csv"),
            read_text(tmp / "b" / "cells" / "hr__V_h" / "pr_curve.csv"));
}

TEST(Experiment, OraclePredictionsScorePerfectly) {
  TempDir tmp;
  const auto ds = plantres::generate_dataset(small_params(), 3, plantres::DatasetRole::kValHigh);
  plantres::write_dataset(ds, tmp / "vh");
  std::vector<plantres::Prediction> oracle;
  for (const auto& m : ds.descriptor.images) {
    for (const auto& b : ds.descriptor.annotation_for(m.image_id).boxes) {
      oracle.push_back({m.image_id, b, 0.9});
    }
  }
  write_text(tmp / "oracle.jsonl", plantres::serialize_predictions(oracle));
  write_text(tmp / "exp.json", R"({
    "datasets": [{"role": "V_h", "manifest": "vh/manifest.json"}],
    "runs": [{"label": "oracle", "predictions": {"V_h": "oracle.jsonl"}}]
  })");
  const auto rep = plantres::run_experiment(plantres::load_experiment_config(tmp / "exp.json"));
  ASSERT_EQ(rep.cells.size(), 1u);
  const auto& m = rep.cells[0].second;
  EXPECT_DOUBLE_EQ(m.ap, 1.0);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(m.rrmse, 0.0);
  EXPECT_EQ(m.totals.tp, oracle.size());
  EXPECT_TRUE(fs::exists(tmp / "experiment_out" / "report.csv"));
  EXPECT_FALSE(fs::exists(tmp / "experiment_out" / "cells" / "oracle__V_h" / "predictions.jsonl"));
}

TEST(Experiment, FailingCellIsNamed) {
  TempDir tmp;
  const auto ds = plantres::generate_dataset(small_params(), 1, plantres::DatasetRole::kValHigh);
  plantres::write_dataset(ds, tmp / "vh");
  write_text(tmp / "bad.jsonl",
             R"({"image_id": "nowhere", "x_min": 0, "y_min": 0, "x_max": 5, "y_max": 5, "score": 0.9})"
             "\n");
  write_text(tmp / "exp.json", R"({
    "datasets": [{"role": "V_h", "manifest": "vh/manifest.json"}],
    "runs": [{"label": "broken", "predictions": {"V_h": "bad.jsonl"}}]
  })");
  const auto cfg = plantres::load_experiment_config(tmp / "exp.json");
  EXPECT_PLANTRES_ERROR(plantres::run_experiment(cfg), ErrorCode::kDanglingReference,
                        "cell (broken, V_h)");
  EXPECT_FALSE(fs::exists(tmp / "experiment_out" / "report.csv"));
}

TEST(Variance, Ranking) {
  const auto native = plantres::generate_dataset(small_params(), 2, plantres::DatasetRole::kValLow,
                                                 "native");
  const auto same = native;
  EXPECT_DOUBLE_EQ(plantres::mean_image_variance(same), plantres::mean_image_variance(native));

  auto single = plantres::compare_variance(native, {same});
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].rank, 1);
  EXPECT_DOUBLE_EQ(single[0].distance, 0.0);

  auto flat = native;
  flat.descriptor.name = "flat";
  for (auto& img : flat.images) img = plantres::Raster(img.width(), img.height(), 90);
  auto ranked = plantres::compare_variance(native, {flat, same});
  ASSERT_EQ(ranked.size(), 2u);
  EXPECT_EQ(ranked[0].name, "native");
  EXPECT_EQ(ranked[0].rank, 1);
  EXPECT_EQ(ranked[1].name, "flat");
  EXPECT_EQ(ranked[1].rank, 2);
  EXPECT_DOUBLE_EQ(ranked[1].mean_variance, 0.0);

  const std::string csv = plantres::variance_csv(native, ranked);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "rank,dataset,role,mean_variance,distance");

  auto other = plantres::generate_dataset(small_params(), 3, plantres::DatasetRole::kValLow,
                                          "other");
  EXPECT_PLANTRES_ERROR(plantres::compare_variance(native, {other}),
                        ErrorCode::kDanglingReference, "other");
}

TEST(DetectDataset, MatchesPerImageDetection) {
  const auto ds = plantres::generate_dataset(small_params(9), 3, plantres::DatasetRole::kValHigh);
  const plantres::DetectorConfig cfg;
  std::vector<plantres::Prediction> expected;
  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    const auto p = plantres::detect_plants(ds.images[i], cfg, ds.descriptor.images[i].image_id);
    expected.insert(expected.end(), p.begin(), p.end());
  }
  EXPECT_EQ(plantres::detect_dataset(ds, cfg, 3), expected);
}
