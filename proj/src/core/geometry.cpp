#include "plantres/geometry.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace plantres {

double area(const BBox& b) { return (b.x_max - b.x_min) * (b.y_max - b.y_min); }

double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  return inter / (area(a) + area(b) - inter);
}

namespace {

MatchResult greedy_match(std::span<const BBox> gt, std::span<const Prediction> preds,
                         double iou_threshold, std::optional<double> confidence_threshold) {
  std::vector<std::size_t> order;
  order.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!confidence_threshold || preds[i].score > *confidence_threshold) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });

  MatchResult result;
  std::vector<bool> matched(gt.size(), false);
  for (std::size_t p : order) {
    double best = -1.0;
    std::size_t best_gt = gt.size();
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (matched[g]) continue;
      const double v = iou(preds[p].box, gt[g]);
      if (v > best) {
        best = v;
        best_gt = g;
      }
    }
    if (best_gt < gt.size() && best >= iou_threshold && best > 0.0) {
      matched[best_gt] = true;
      result.tp_pairs.push_back({best_gt, p, best});
    } else {
      result.fp_indices.push_back(p);
    }
  }
  for (std::size_t g = 0; g < gt.size(); ++g) {
    if (!matched[g]) result.fn_indices.push_back(g);
  }
  return result;
}

}  // namespace

MatchResult match_detections(std::span<const BBox> gt, std::span<const Prediction> preds,
                             double iou_threshold, double confidence_threshold) {
  return greedy_match(gt, preds, iou_threshold, confidence_threshold);
}

MatchResult match_all_detections(std::span<const BBox> gt, std::span<const Prediction> preds,
                                 double iou_threshold) {
  return greedy_match(gt, preds, iou_threshold, std::nullopt);
}

ConfusionCounts counts(const MatchResult& m) {
  return {m.tp_pairs.size(), m.fp_indices.size(), m.fn_indices.size()};
}

}  // namespace plantres
