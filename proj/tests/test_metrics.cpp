#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "expect_error.hpp"
#include "oracles.hpp"
#include "plantres/metrics.hpp"

using plantres::Annotation;
using plantres::BBox;
using plantres::ConfusionCounts;
using plantres::CountRecord;
using plantres::GroundTruth;
using plantres::Prediction;

namespace {

// Two gt boxes; predictions at 0.9 (TP), 0.8 (FP), 0.7 (TP).
GroundTruth three_pred_gt() {
  return {{"img", Annotation{"img", {BBox{0, 0, 10, 10}, BBox{20, 20, 30, 30}}}}};
}
std::vector<Prediction> three_preds() {
  return {{"img", {0, 0, 10, 10}, 0.9}, {"img", {50, 50, 60, 60}, 0.8},
          {"img", {20, 20, 30, 30}, 0.7}};
}

BBox random_box(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> c(0, 30), e(2, 12);
  const double x = c(rng), y = c(rng);
  return {x, y, x + e(rng), y + e(rng)};
}

struct ApInstance {
  GroundTruth gt;
  std::vector<Prediction> preds;
};

ApInstance random_ap_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_img(1, 5), n(0, 10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ApInstance in;
  const int images = n_img(rng);
  for (int i = 0; i < images; ++i) {
    const std::string id = "im" + std::to_string(i);
    Annotation a{id, {}};
    const int ng = n(rng), np = n(rng);
    for (int g = 0; g < ng; ++g) a.boxes.push_back(random_box(rng));
    for (int p = 0; p < np; ++p) {
      // Jitter a gt box half the time so there are plenty of matches.
      BBox b = (ng > 0 && unit(rng) < 0.5) ? a.boxes[rng() % ng] : random_box(rng);
      b.x_max += unit(rng) * 3;
      b.y_max += unit(rng) * 3;
      in.preds.push_back({id, b, unit(rng)});
    }
    in.gt.emplace(id, std::move(a));
  }
  return in;
}

plantres::DatasetDescriptor descriptor_from(const GroundTruth& gt) {
  plantres::DatasetDescriptor d;
  d.name = "t";
  d.role = plantres::DatasetRole::kValHigh;
  d.role_label = "V_h";
  int i = 0;
  for (const auto& [id, a] : gt) {
    d.images.push_back({id, id + ".png", 100, 100, 0.3, i++ % 2 ? "north" : "south"});
    d.annotations.emplace(id, a);
  }
  return d;
}

}  // namespace

TEST(PrecisionRecall, Examples) {
  const auto a = plantres::precision_recall({88, 6, 6});
  EXPECT_NEAR(a.precision, 0.9362, 1e-4);
  EXPECT_NEAR(a.recall, 0.9362, 1e-4);
  EXPECT_DOUBLE_EQ(a.precision, 88.0 / 94.0);
  const auto b = plantres::precision_recall({0, 0, 0});
  EXPECT_EQ(b.precision, 1.0);
  EXPECT_EQ(b.recall, 1.0);
  const auto c = plantres::precision_recall({5, 5, 0});
  EXPECT_EQ(c.precision, 0.5);
  EXPECT_EQ(c.recall, 1.0);
}

TEST(Accuracy, Examples) {
  EXPECT_NEAR(plantres::accuracy({88, 6, 6}), 0.88, 1e-12);
  EXPECT_EQ(plantres::accuracy({0, 10, 0}), 0.0);
  EXPECT_EQ(plantres::accuracy({0, 0, 0}), 1.0);
}

TEST(Accuracy, BoundedByPrecisionAndRecall) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> n(0, 50);
  for (int i = 0; i < 2000; ++i) {
    const ConfusionCounts c{n(rng), n(rng), n(rng)};
    if (c.tp + c.fp + c.fn == 0) continue;
    const auto pr = plantres::precision_recall(c);
    EXPECT_LE(plantres::accuracy(c), std::min(pr.precision, pr.recall) + 1e-15);
  }
}

TEST(AveragePrecision, Examples) {
  const GroundTruth one{{"a", Annotation{"a", {BBox{0, 0, 10, 10}}}}};
  EXPECT_DOUBLE_EQ(plantres::average_precision(one, {{"a", {0, 0, 10, 10}, 0.3}}, 0.5), 1.0);
  EXPECT_NEAR(plantres::average_precision(three_pred_gt(), three_preds(), 0.25), 0.8350, 1e-4);
  EXPECT_NEAR(plantres::average_precision(three_pred_gt(), three_preds(), 0.25),
              (51.0 + 50.0 * 2.0 / 3.0) / 101.0, 1e-12);
  const GroundTruth three{{"a", Annotation{"a", {BBox{0, 0, 1, 1}, BBox{2, 2, 3, 3},
                                                 BBox{4, 4, 5, 5}}}}};
  EXPECT_EQ(plantres::average_precision(three, {}, 0.25), 0.0);
}

TEST(AveragePrecision, EmptyConventions) {
  const GroundTruth empty{{"a", Annotation{"a", {}}}};
  EXPECT_EQ(plantres::average_precision(empty, {}, 0.5), 1.0);
  EXPECT_EQ(plantres::average_precision(empty, {{"a", {0, 0, 1, 1}, 0.9}}, 0.5), 0.0);
}

TEST(AveragePrecision, ScoreZeroPredictionsCount) {
  const GroundTruth one{{"a", Annotation{"a", {BBox{0, 0, 10, 10}}}}};
  EXPECT_DOUBLE_EQ(plantres::average_precision(one, {{"a", {0, 0, 10, 10}, 0.0}}, 0.5), 1.0);
}

TEST(AveragePrecision, DanglingImageId) {
  EXPECT_PLANTRES_ERROR(
      plantres::average_precision(three_pred_gt(), {{"ghost", {0, 0, 1, 1}, 0.5}}, 0.5),
      plantres::ErrorCode::kDanglingReference, "ghost");
}

TEST(AveragePrecision, ThresholdEnumerationOracle) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const ApInstance in = random_ap_instance(rng);
    for (double thr : {0.25, 0.5, 0.75}) {
      EXPECT_NEAR(plantres::average_precision(in.gt, in.preds, thr),
                  oracle::threshold_enumeration_ap(in.gt, in.preds, thr), 1e-9)
          << "trial " << trial << " thr " << thr;
    }
  }
}

TEST(AveragePrecision, MonotoneInIouThreshold) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 300; ++trial) {
    const ApInstance in = random_ap_instance(rng);
    const double a25 = plantres::average_precision(in.gt, in.preds, 0.25);
    const double a50 = plantres::average_precision(in.gt, in.preds, 0.5);
    const double a75 = plantres::average_precision(in.gt, in.preds, 0.75);
    EXPECT_GE(a25, a50);
    EXPECT_GE(a50, a75);
  }
}

TEST(PrCurve, Examples) {
  const GroundTruth one{{"a", Annotation{"a", {BBox{0, 0, 10, 10}}}}};
  const auto perfect = plantres::pr_curve(one, {{"a", {0, 0, 10, 10}, 0.9}}, 0.5);
  ASSERT_EQ(perfect.points.size(), 1u);
  EXPECT_EQ(perfect.points[0], (plantres::PRPoint{1.0, 1.0}));

  const auto c = plantres::pr_curve(three_pred_gt(), three_preds(), 0.25);
  ASSERT_EQ(c.points.size(), 3u);
  EXPECT_EQ(c.points[0], (plantres::PRPoint{0.5, 1.0}));
  EXPECT_EQ(c.points[1], (plantres::PRPoint{0.5, 0.5}));
  EXPECT_DOUBLE_EQ(c.points[2].recall, 1.0);
  EXPECT_DOUBLE_EQ(c.points[2].precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(plantres::interpolated_ap(c), plantres::average_precision(three_pred_gt(), three_preds(), 0.25));

  EXPECT_TRUE(plantres::pr_curve(one, {}, 0.5).points.empty());
}

TEST(PrCurve, RecallsNonDecreasingAndBounded) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const ApInstance in = random_ap_instance(rng);
    const auto c = plantres::pr_curve(in.gt, in.preds, 0.5);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      EXPECT_GE(c.points[i].recall, 0.0);
      EXPECT_LE(c.points[i].recall, 1.0);
      EXPECT_GE(c.points[i].precision, 0.0);
      EXPECT_LE(c.points[i].precision, 1.0);
      if (i > 0) {
        EXPECT_GE(c.points[i].recall, c.points[i - 1].recall);
      }
    }
  }
}

TEST(Rrmse, Examples) {
  EXPECT_EQ(plantres::rrmse({{"a", 10, 10}, {"b", 20, 20}}), 0.0);
  EXPECT_NEAR(plantres::rrmse({{"a", 10, 12}, {"b", 20, 18}}), 0.133333, 1e-6);
  EXPECT_NEAR(plantres::rrmse({{"a", 10, 12}, {"b", 20, 18}}), 2.0 / 15.0, 1e-12);
  EXPECT_DOUBLE_EQ(plantres::rrmse({{"a", 10, 0}}), 1.0);
}

TEST(Rrmse, Errors) {
  EXPECT_PLANTRES_ERROR(plantres::rrmse({}), plantres::ErrorCode::kUndefined, "");
  EXPECT_PLANTRES_ERROR(plantres::rrmse({{"a", 0, 3}, {"b", 0, 0}}),
                        plantres::ErrorCode::kUndefined, "");
}

TEST(Rrmse, ZeroIffExactAndDuplicationInvariant) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::size_t> n(0, 40);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<CountRecord> recs;
    const int k = 1 + static_cast<int>(rng() % 8);
    bool exact = true;
    for (int i = 0; i < k; ++i) {
      recs.push_back({"i" + std::to_string(i), n(rng) + 1, n(rng)});
      exact = exact && recs.back().labeled == recs.back().predicted;
    }
    const double r = plantres::rrmse(recs);
    EXPECT_EQ(r == 0.0, exact);
    auto twice = recs;
    twice.insert(twice.end(), recs.begin(), recs.end());
    EXPECT_NEAR(plantres::rrmse(twice), r, 1e-12);
  }
}

TEST(Overdetection, Examples) {
  const std::vector<BBox> gt{{0, 0, 10, 10}};
  const auto two = plantres::overdetection_profile(
      gt, {{"a", {0, 0, 5, 5}, 0.9}, {"a", {5, 5, 20, 20}, 0.8}}, {50, 500});
  ASSERT_EQ(two.size(), 3u);
  EXPECT_EQ(two[1].gt_count, 1u);  // area 100 falls in [50, 500)
  EXPECT_DOUBLE_EQ(two[1].mean_intersecting, 2.0);
  EXPECT_EQ(two[0].gt_count, 0u);
  EXPECT_DOUBLE_EQ(two[0].mean_intersecting, 0.0);

  const auto none = plantres::overdetection_profile(gt, {{"a", {10, 10, 20, 20}, 0.9}}, {50});
  EXPECT_DOUBLE_EQ(none[1].mean_intersecting, 0.0);
  EXPECT_EQ(none[1].gt_count, 1u);
}

TEST(Overdetection, UnsortedEdges) {
  EXPECT_PLANTRES_ERROR(plantres::overdetection_profile({}, {}, {500, 100}),
                        plantres::ErrorCode::kInvalidArgument, "");
}

TEST(Evaluate, PerfectPredictions) {
  std::mt19937_64 rng(13);
  const ApInstance in = random_ap_instance(rng);
  GroundTruth gt = in.gt;
  gt["extra"] = Annotation{"extra", {BBox{1, 1, 9, 9}}};
  std::vector<Prediction> echo;
  for (const auto& [id, a] : gt) {
    for (const auto& b : a.boxes) echo.push_back({id, b, 1.0});
  }
  const auto r = plantres::evaluate(descriptor_from(gt), echo, {});
  EXPECT_DOUBLE_EQ(r.ap, 1.0);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.rrmse, 0.0);
}

TEST(Evaluate, ZeroPredictions) {
  GroundTruth gt{{"a", Annotation{"a", {BBox{0, 0, 5, 5}, BBox{10, 10, 15, 15}}}},
                 {"b", Annotation{"b", {BBox{0, 0, 5, 5}, BBox{20, 20, 25, 25}}}}};
  const auto r = plantres::evaluate(descriptor_from(gt), {}, {});
  EXPECT_EQ(r.ap, 0.0);
  EXPECT_EQ(r.accuracy, 0.0);
  EXPECT_DOUBLE_EQ(r.rrmse, 1.0);
  EXPECT_EQ(r.totals, (ConfusionCounts{0, 0, 4}));
}

TEST(Evaluate, ThreePredictionExample) {
  const auto r = plantres::evaluate(descriptor_from(three_pred_gt()), three_preds(), {});
  EXPECT_NEAR(r.ap, 0.8350, 1e-4);
  EXPECT_EQ(r.totals, (ConfusionCounts{2, 1, 0}));
  EXPECT_EQ(r.n_gt, 2u);
  EXPECT_EQ(r.curve.points.size(), 3u);
}

TEST(Evaluate, PerSiteAndCountRecords) {
  GroundTruth gt{{"a", Annotation{"a", {BBox{0, 0, 5, 5}}}},
                 {"b", Annotation{"b", {BBox{0, 0, 5, 5}, BBox{20, 20, 25, 25}}}}};
  const std::vector<Prediction> preds{{"a", {0, 0, 5, 5}, 0.9},
                                      {"b", {0, 0, 5, 5}, 0.9},
                                      {"b", {40, 40, 45, 45}, 0.9},
                                      {"b", {20, 20, 25, 25}, 0.2}};
  const auto r = plantres::evaluate(descriptor_from(gt), preds, {});
  EXPECT_EQ(r.per_site.at("south"), (ConfusionCounts{1, 0, 0}));
  EXPECT_EQ(r.per_site.at("north"), (ConfusionCounts{1, 1, 1}));
  ASSERT_EQ(r.count_records.size(), 2u);
  EXPECT_EQ(r.count_records[1].labeled, 2u);
  EXPECT_EQ(r.count_records[1].predicted, 2u);
}

TEST(Evaluate, DeterministicAndOrderIndependent) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const ApInstance in = random_ap_instance(rng);
    std::size_t n_gt = 0;
    for (const auto& [id, a] : in.gt) n_gt += a.boxes.size();
    if (n_gt == 0) continue;  // rRMSE is undefined
    auto d = descriptor_from(in.gt);
    const auto base = plantres::evaluate(d, in.preds, {}, 1);
    auto shuffled_preds = in.preds;
    std::shuffle(shuffled_preds.begin(), shuffled_preds.end(), rng);
    // Equal scores are not generated, so prediction order cannot matter.
    std::reverse(d.images.begin(), d.images.end());
    const auto other = plantres::evaluate(d, shuffled_preds, {}, 4);
    EXPECT_DOUBLE_EQ(base.ap, other.ap);
    EXPECT_DOUBLE_EQ(base.accuracy, other.accuracy);
    EXPECT_EQ(base.totals, other.totals);
    EXPECT_EQ(base.per_site, other.per_site);
    EXPECT_EQ(base.curve.points, other.curve.points);
    const auto again = plantres::evaluate(descriptor_from(in.gt), in.preds, {}, 3);
    EXPECT_EQ(plantres::metrics_csv_row(base), plantres::metrics_csv_row(again));
  }
}

TEST(Evaluate, NoLabeledPlantsLeavesRrmseUndefined) {
  const GroundTruth empty{{"a", Annotation{"a", {}}}};
  EXPECT_PLANTRES_ERROR(plantres::evaluate(descriptor_from(empty), {}, {}),
                        plantres::ErrorCode::kUndefined, "rRMSE");
}

TEST(Evaluate, DanglingPrediction) {
  EXPECT_PLANTRES_ERROR(
      plantres::evaluate(descriptor_from(three_pred_gt()), {{"zz", {0, 0, 1, 1}, 0.9}}, {}),
      plantres::ErrorCode::kDanglingReference, "zz");
}
