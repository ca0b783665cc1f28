#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "plantres/geometry.hpp"
#include "plantres/types.hpp"

namespace plantres {

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 1.0;
};

/// Vacuous denominators give 1.0: no predictions means perfect precision,
/// no ground truth means perfect recall.
PrecisionRecall precision_recall(const ConfusionCounts& c);

/// TP / (TP + FP + FN); 1.0 when all three are zero.
double accuracy(const ConfusionCounts& c);

struct PRPoint {
  double recall = 0.0;
  double precision = 0.0;

  bool operator==(const PRPoint&) const = default;
};

struct PRCurve {
  double iou_threshold = 0.0;
  std::vector<PRPoint> points;  // ascending recall
};

using GroundTruth = std::map<std::string, Annotation>;

/// Raw cumulative precision/recall after each prediction of a global sweep
/// by descending score (ties: earlier prediction first). Every prediction
/// takes part; matching is per image and greedy as in match_detections.
PRCurve pr_curve(const GroundTruth& gt, const std::vector<Prediction>& preds,
                 double iou_threshold);

/// Mean over `recall_points` equally spaced recalls in [0,1] of the
/// precision envelope max{p : r' >= r}. 1.0 when there is neither ground
/// truth nor prediction; 0.0 when only one side is empty.
double average_precision(const GroundTruth& gt, const std::vector<Prediction>& preds,
                         double iou_threshold, int recall_points = 101);

/// Interpolated AP of an already computed curve (see average_precision).
double interpolated_ap(const PRCurve& curve, int recall_points = 101);

struct CountRecord {
  std::string image_id;
  std::size_t labeled = 0;
  std::size_t predicted = 0;
};

/// RMSE of per-image counts divided by the mean labeled count.
double rrmse(const std::vector<CountRecord>& records);

struct OverdetectionBin {
  double area_lower = 0.0;
  double area_upper = 0.0;  // +inf for the last bin
  std::size_t gt_count = 0;
  double mean_intersecting = 0.0;
};

/// Bins are [0, e0), [e0, e1), ..., [e_last, inf). For each bin, the mean
/// over its gt boxes of how many predictions overlap the box with positive
/// area. Predictions are used as given (no confidence filtering).
std::vector<OverdetectionBin> overdetection_profile(const std::vector<BBox>& gt,
                                                    const std::vector<Prediction>& preds,
                                                    const std::vector<double>& area_bin_edges);

struct EvalConfig {
  double iou_threshold = 0.25;
  double confidence_threshold = 0.5;
  int recall_points = 101;
  std::vector<double> overdetection_bin_edges{500, 1000, 2000, 3000, 4000, 5000, 6000};
};

struct MetricsReport {
  std::string dataset;
  std::string role;
  std::size_t n_images = 0;
  std::size_t n_gt = 0;
  double ap = 0.0;
  double accuracy = 0.0;
  double rrmse = 0.0;
  ConfusionCounts totals;
  std::map<std::string, ConfusionCounts> per_site;
  std::vector<CountRecord> count_records;  // dataset image order
  PRCurve curve;
  std::vector<OverdetectionBin> overdetection;
};

/// One evaluation cell: AP over the full sweep; accuracy, per-site counts,
/// per-image counts and rRMSE from predictions above the confidence
/// threshold. Throws on predictions naming images outside the dataset.
MetricsReport evaluate(const DatasetDescriptor& dataset, const std::vector<Prediction>& preds,
                       const EvalConfig& config, int workers = 1);

// CSV renderings used for external plotting.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& r);
std::string pr_curve_csv(const PRCurve& c);
std::string overdetection_csv(const std::vector<OverdetectionBin>& bins);

/// Fixed 6-decimal rendering used in every CSV output.
std::string csv_number(double v);

}  // namespace plantres
