#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "plantres/geometry.hpp"

using plantres::BBox;
using plantres::Prediction;

namespace {

BBox random_grid_box(std::mt19937_64& rng, int grid) {
  std::uniform_int_distribution<int> c(0, grid);
  int x0, x1, y0, y1;
  do {
    x0 = c(rng);
    x1 = c(rng);
  } while (x0 == x1);
  do {
    y0 = c(rng);
    y1 = c(rng);
  } while (y0 == y1);
  return {static_cast<double>(std::min(x0, x1)), static_cast<double>(std::min(y0, y1)),
          static_cast<double>(std::max(x0, x1)), static_cast<double>(std::max(y0, y1))};
}

struct Instance {
  std::vector<BBox> gt;
  std::vector<Prediction> preds;
};

Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n(0, 10);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  Instance in;
  const int ng = n(rng), np = n(rng);
  for (int i = 0; i < ng; ++i) in.gt.push_back(random_grid_box(rng, 40));
  for (int i = 0; i < np; ++i) in.preds.push_back({"img", random_grid_box(rng, 40), score(rng)});
  return in;
}

}  // namespace

TEST(Iou, Examples) {
  EXPECT_DOUBLE_EQ(plantres::iou({0, 0, 2, 2}, {0, 0, 2, 2}), 1.0);
  EXPECT_DOUBLE_EQ(plantres::iou({0, 0, 2, 2}, {1, 1, 3, 3}), 1.0 / 7.0);
  EXPECT_DOUBLE_EQ(plantres::iou({0, 0, 1, 1}, {5, 5, 6, 6}), 0.0);
  EXPECT_DOUBLE_EQ(plantres::iou({0, 0, 2, 2}, {2, 0, 4, 2}), 0.0);  // shared edge
}

TEST(Area, Examples) {
  EXPECT_DOUBLE_EQ(plantres::area({0, 0, 2, 3}), 6.0);
  EXPECT_DOUBLE_EQ(plantres::area({0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(plantres::area({10, 20, 50, 80}), 2400.0);
}

TEST(Iou, PixelOracleEquivalence) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const BBox a = random_grid_box(rng, 64), b = random_grid_box(rng, 64);
    EXPECT_EQ(plantres::iou(a, b), oracle::pixel_iou(a, b, 64));
  }
}

TEST(Iou, SymmetryAndScaleInvariance) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> s(0.1, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const BBox a = random_grid_box(rng, 64), b = random_grid_box(rng, 64);
    EXPECT_EQ(plantres::iou(a, b), plantres::iou(b, a));
    const double k = s(rng);
    const BBox ka{a.x_min * k, a.y_min * k, a.x_max * k, a.y_max * k};
    const BBox kb{b.x_min * k, b.y_min * k, b.x_max * k, b.y_max * k};
    EXPECT_NEAR(plantres::iou(ka, kb), plantres::iou(a, b), 1e-12);
  }
}

TEST(Match, GreedyExample) {
  const std::vector<BBox> gt{{0, 0, 10, 10}};
  const std::vector<Prediction> preds{{"i", {1, 1, 11, 11}, 0.9}, {"i", {0, 0, 10, 10}, 0.6}};
  const auto m = plantres::match_detections(gt, preds, 0.25, 0.5);
  ASSERT_EQ(m.tp_pairs.size(), 1u);
  EXPECT_EQ(m.tp_pairs[0].gt_index, 0u);
  EXPECT_EQ(m.tp_pairs[0].pred_index, 0u);
  EXPECT_DOUBLE_EQ(m.tp_pairs[0].iou, 81.0 / 119.0);
  EXPECT_NEAR(m.tp_pairs[0].iou, 0.6807, 1e-4);
  EXPECT_EQ(m.fp_indices, std::vector<std::size_t>{1});
  EXPECT_TRUE(m.fn_indices.empty());
}

TEST(Match, NoGroundTruth) {
  const std::vector<Prediction> preds{{"i", {0, 0, 5, 5}, 0.9}};
  const auto m = plantres::match_detections({}, preds, 0.25, 0.5);
  EXPECT_TRUE(m.tp_pairs.empty());
  EXPECT_EQ(m.fp_indices, std::vector<std::size_t>{0});
  EXPECT_TRUE(m.fn_indices.empty());
}

TEST(Match, BelowConfidenceDiscarded) {
  const std::vector<BBox> gt{{0, 0, 5, 5}};
  const std::vector<Prediction> preds{{"i", {0, 0, 5, 5}, 0.4}, {"i", {0, 0, 5, 5}, 0.5}};
  const auto m = plantres::match_detections(gt, preds, 0.25, 0.5);
  EXPECT_TRUE(m.tp_pairs.empty());
  EXPECT_TRUE(m.fp_indices.empty());  // 0.5 is not "more than 0.5"
  EXPECT_EQ(m.fn_indices, std::vector<std::size_t>{0});
}

TEST(Match, TiesBreakByPredictionIndex) {
  const std::vector<BBox> gt{{0, 0, 10, 10}};
  const std::vector<Prediction> preds{{"i", {0, 0, 10, 9}, 0.7}, {"i", {0, 0, 10, 10}, 0.7}};
  const auto m = plantres::match_detections(gt, preds, 0.25, 0.5);
  ASSERT_EQ(m.tp_pairs.size(), 1u);
  EXPECT_EQ(m.tp_pairs[0].pred_index, 0u);
  EXPECT_EQ(m.fp_indices, std::vector<std::size_t>{1});
}

TEST(Match, NoDoubleMatching) {
  const std::vector<BBox> gt{{0, 0, 10, 10}, {50, 50, 60, 60}};
  const std::vector<Prediction> preds{{"i", {0, 0, 10, 10}, 0.9}, {"i", {1, 0, 10, 10}, 0.8}};
  const auto m = plantres::match_detections(gt, preds, 0.25, 0.5);
  EXPECT_EQ(plantres::counts(m), (plantres::ConfusionCounts{1, 1, 1}));
  EXPECT_EQ(m.fn_indices, std::vector<std::size_t>{1});
}

TEST(Counts, Cardinalities) {
  plantres::MatchResult m;
  m.tp_pairs = {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}};
  m.fp_indices = {3};
  m.fn_indices = {3, 4};
  EXPECT_EQ(plantres::counts(m), (plantres::ConfusionCounts{3, 1, 2}));
  EXPECT_EQ(plantres::counts({}), (plantres::ConfusionCounts{0, 0, 0}));
}

TEST(Match, ConservationProperty) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const Instance in = random_instance(rng);
    const auto m = plantres::match_detections(in.gt, in.preds, 0.3, 0.5);
    const auto c = plantres::counts(m);
    std::size_t above = 0;
    for (const auto& p : in.preds) above += p.score > 0.5;
    EXPECT_EQ(c.tp + c.fn, in.gt.size());
    EXPECT_EQ(c.tp + c.fp, above);
    for (const auto& tp : m.tp_pairs) EXPECT_GE(tp.iou, 0.3);
    std::vector<int> seen(in.gt.size(), 0);
    for (const auto& tp : m.tp_pairs) ++seen[tp.gt_index];
    for (auto g : m.fn_indices) ++seen[g];
    for (int s : seen) EXPECT_EQ(s, 1);
  }
}

TEST(Match, MonotoneInIouThreshold) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const Instance in = random_instance(rng);
    std::size_t prev = in.gt.size() + 1;
    for (double thr : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      const auto tp = plantres::counts(plantres::match_detections(in.gt, in.preds, thr, 0.5)).tp;
      EXPECT_LE(tp, prev);
      prev = tp;
    }
  }
}

TEST(Match, Deterministic) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Instance in = random_instance(rng);
    EXPECT_EQ(plantres::match_detections(in.gt, in.preds, 0.25, 0.5),
              plantres::match_detections(in.gt, in.preds, 0.25, 0.5));
  }
}

TEST(Match, OracleTruePositiveCount) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    const Instance in = random_instance(rng);
    std::vector<Prediction> kept;
    for (const auto& p : in.preds) {
      if (p.score > 0.5) kept.push_back(p);
    }
    EXPECT_EQ(plantres::counts(plantres::match_detections(in.gt, in.preds, 0.25, 0.5)).tp,
              oracle::greedy_tp(in.gt, kept, 0.25));
  }
}

TEST(Match, InvariantUnderJointScaling) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    Instance in = random_instance(rng);
    const auto before = plantres::match_detections(in.gt, in.preds, 0.25, 0.5);
    for (auto& b : in.gt) b = {b.x_min * 0.5, b.y_min * 0.5, b.x_max * 0.5, b.y_max * 0.5};
    for (auto& p : in.preds) {
      p.box = {p.box.x_min * 0.5, p.box.y_min * 0.5, p.box.x_max * 0.5, p.box.y_max * 0.5};
    }
    EXPECT_EQ(plantres::match_detections(in.gt, in.preds, 0.25, 0.5), before);
  }
}
