#include <gtest/gtest.h>

#include "expect_error.hpp"
#include "plantres/config.hpp"

using plantres::ErrorCode;

TEST(Config, EmptyObjectsKeepDefaults) {
  const auto s = plantres::parse_synth_params("{}");
  EXPECT_EQ(s.rows, plantres::SynthFieldParams{}.rows);
  EXPECT_DOUBLE_EQ(s.gsd_cm, 0.3);
  const auto d = plantres::parse_degrade_params("{}");
  EXPECT_DOUBLE_EQ(d.gaussian_sigma, 0.63);
  EXPECT_EQ(d.gaussian_window, 9);
  EXPECT_EQ(d.decimation_factor, 2);
  const auto e = plantres::parse_eval_config("{}");
  EXPECT_DOUBLE_EQ(e.iou_threshold, 0.25);
  EXPECT_DOUBLE_EQ(e.confidence_threshold, 0.5);
  EXPECT_EQ(e.recall_points, 101);
  EXPECT_EQ(e.overdetection_bin_edges.size(), 7u);
}

TEST(Config, ReadsEveryField) {
  const auto s = plantres::parse_synth_params(
      R"({"rows": 2, "plants_per_row": 3, "gsd_cm": 0.6, "shadow": false, "seed": 18446744073709551615})");
  EXPECT_EQ(s.rows, 2);
  EXPECT_EQ(s.plants_per_row, 3);
  EXPECT_DOUBLE_EQ(s.gsd_cm, 0.6);
  EXPECT_FALSE(s.shadow);
  EXPECT_EQ(s.seed, 18446744073709551615ull);

  const auto c = plantres::parse_detector_config(
      R"({"threshold_mode": "fixed", "fixed_threshold": 25, "min_area_px": 30,
          "max_area_px": 375, "morph_open_radius": 0})");
  EXPECT_EQ(c.threshold_mode, plantres::ThresholdMode::kFixed);
  EXPECT_DOUBLE_EQ(c.fixed_threshold, 25);
  EXPECT_DOUBLE_EQ(c.max_area_px, 375);
  EXPECT_EQ(c.morph_open_radius, 0);

  const auto e = plantres::parse_eval_config(
      R"({"iou_threshold": 0.5, "overdetection_bin_edges": [10, 20]})");
  EXPECT_EQ(e.overdetection_bin_edges, (std::vector<double>{10, 20}));

  const auto job = plantres::parse_synth_job(
      R"({"name": "f", "role": "T_h", "n_plots": 7, "params": {"rows": 1}})");
  EXPECT_EQ(job.name, "f");
  EXPECT_EQ(job.role, "T_h");
  EXPECT_EQ(job.n_plots, 7);
  EXPECT_EQ(job.params.rows, 1);
}

TEST(Config, Rejections) {
  EXPECT_PLANTRES_ERROR(plantres::parse_synth_params("[1"), ErrorCode::kConfig, "synth params");
  EXPECT_PLANTRES_ERROR(plantres::parse_synth_params("[]"), ErrorCode::kConfig, "object");
  EXPECT_PLANTRES_ERROR(plantres::parse_degrade_params(R"({"sigma": 1})"), ErrorCode::kConfig,
                        "unknown key 'sigma'");
  EXPECT_PLANTRES_ERROR(plantres::parse_degrade_params(R"({"gaussian_window": "nine"})"),
                        ErrorCode::kConfig, "gaussian_window");
  EXPECT_PLANTRES_ERROR(plantres::parse_degrade_params(R"({"gaussian_window": 8})"),
                        ErrorCode::kConfig, "degrade params");
  EXPECT_PLANTRES_ERROR(plantres::parse_detector_config(R"({"threshold_mode": "mean"})"),
                        ErrorCode::kConfig, "threshold_mode");
  EXPECT_PLANTRES_ERROR(plantres::parse_detector_config(R"({"min_area_px": 5000})"),
                        ErrorCode::kConfig, "detector config");
  EXPECT_PLANTRES_ERROR(plantres::parse_eval_config(R"({"iou_threshold": 1.5})"),
                        ErrorCode::kConfig, "[0, 1]");
  EXPECT_PLANTRES_ERROR(plantres::parse_eval_config(R"({"recall_points": 1})"), ErrorCode::kConfig,
                        "recall_points");
  EXPECT_PLANTRES_ERROR(plantres::parse_eval_config(R"({"overdetection_bin_edges": [5, 5]})"),
                        ErrorCode::kConfig, "increasing");
  EXPECT_PLANTRES_ERROR(plantres::parse_synth_params(R"({"rows": 0})"), ErrorCode::kConfig,
                        "synth params");
}

TEST(Config, Fnv1a) {
  EXPECT_EQ(plantres::fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(plantres::fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(plantres::fnv1a_hex("foobar"), "85944171f73967e8");
}
