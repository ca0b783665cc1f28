#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "plantres/types.hpp"

namespace plantres {

double area(const BBox& b);
double intersection_area(const BBox& a, const BBox& b);

/// Intersection over union; 0 for disjoint boxes.
double iou(const BBox& a, const BBox& b);

struct TruePositive {
  std::size_t gt_index;
  std::size_t pred_index;
  double iou;

  bool operator==(const TruePositive&) const = default;
};

/// TP/FP/FN assignment for a single image. Indices refer to the gt and
/// prediction lists passed to match_detections. tp_pairs and fp_indices are
/// in processing order (descending score); fn_indices ascending.
struct MatchResult {
  std::vector<TruePositive> tp_pairs;
  std::vector<std::size_t> fp_indices;
  std::vector<std::size_t> fn_indices;

  bool operator==(const MatchResult&) const = default;
};

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Greedy matching. Predictions with score <= confidence_threshold are
/// discarded; the rest are visited by descending score (ties: lower index
/// first). Each one takes the still-unmatched gt box of highest IoU and is a
/// TP when that IoU >= iou_threshold, otherwise an FP. A gt box is matched at
/// most once.
MatchResult match_detections(std::span<const BBox> gt, std::span<const Prediction> preds,
                             double iou_threshold, double confidence_threshold);

/// Same procedure without any confidence floor: every prediction, including
/// score 0, takes part.
MatchResult match_all_detections(std::span<const BBox> gt, std::span<const Prediction> preds,
                                 double iou_threshold);

ConfusionCounts counts(const MatchResult& m);

}  // namespace plantres
