#include "plantres/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "plantres/error.hpp"
#include "plantres/parallel.hpp"

namespace plantres {

PrecisionRecall precision_recall(const ConfusionCounts& c) {
  PrecisionRecall pr;
  if (c.tp + c.fp > 0) pr.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) pr.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return pr;
}

double accuracy(const ConfusionCounts& c) {
  const std::size_t denom = c.tp + c.fp + c.fn;
  if (denom == 0) return 1.0;
  return static_cast<double>(c.tp) / static_cast<double>(denom);
}

namespace {

std::size_t total_gt(const GroundTruth& gt) {
  std::size_t n = 0;
  for (const auto& [id, a] : gt) n += a.boxes.size();
  return n;
}

// is_tp[i] for every prediction, from per-image greedy matching with no
// confidence floor.
std::vector<bool> classify_predictions(const GroundTruth& gt, const std::vector<Prediction>& preds,
                                       double iou_threshold) {
  std::map<std::string, std::vector<std::size_t>> by_image;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!gt.count(preds[i].image_id)) {
      throw Error(ErrorCode::kDanglingReference,
                  "prediction " + std::to_string(i) + " references unknown image '" +
                      preds[i].image_id + "'");
    }
    by_image[preds[i].image_id].push_back(i);
  }
  std::vector<bool> is_tp(preds.size(), false);
  for (const auto& [id, indices] : by_image) {
    std::vector<Prediction> local;
    local.reserve(indices.size());
    for (std::size_t i : indices) local.push_back(preds[i]);
    const auto& boxes = gt.at(id).boxes;
    MatchResult m = match_all_detections(boxes, local, iou_threshold);
    for (const auto& tp : m.tp_pairs) is_tp[indices[tp.pred_index]] = true;
  }
  return is_tp;
}

}  // namespace

PRCurve pr_curve(const GroundTruth& gt, const std::vector<Prediction>& preds,
                 double iou_threshold) {
  PRCurve curve;
  curve.iou_threshold = iou_threshold;
  const std::vector<bool> is_tp = classify_predictions(gt, preds, iou_threshold);

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });

  const std::size_t n_gt = total_gt(gt);
  std::size_t tp = 0;
  curve.points.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    tp += is_tp[order[k]] ? 1 : 0;
    const double precision = static_cast<double>(tp) / static_cast<double>(k + 1);
    const double recall =
        n_gt == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(n_gt);
    curve.points.push_back({recall, precision});
  }
  return curve;
}

double interpolated_ap(const PRCurve& curve, int recall_points) {
  if (recall_points < 2) throw Error(ErrorCode::kInvalidArgument, "recall_points must be >= 2");
  const auto& pts = curve.points;
  // envelope[k] = max precision over points k..end
  std::vector<double> envelope(pts.size());
  double running = 0.0;
  for (std::size_t k = pts.size(); k-- > 0;) {
    running = std::max(running, pts[k].precision);
    envelope[k] = running;
  }
  double sum = 0.0;
  std::size_t k = 0;
  const int steps = recall_points - 1;
  for (int i = 0; i <= steps; ++i) {
    const double r = static_cast<double>(i) / static_cast<double>(steps);
    while (k < pts.size() && pts[k].recall < r) ++k;
    if (k < pts.size()) sum += envelope[k];
  }
  return sum / static_cast<double>(recall_points);
}

double average_precision(const GroundTruth& gt, const std::vector<Prediction>& preds,
                         double iou_threshold, int recall_points) {
  PRCurve curve = pr_curve(gt, preds, iou_threshold);
  const std::size_t n_gt = total_gt(gt);
  if (n_gt == 0) return preds.empty() ? 1.0 : 0.0;
  if (preds.empty()) return 0.0;
  return interpolated_ap(curve, recall_points);
}

double rrmse(const std::vector<CountRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::kUndefined, "rRMSE of an empty record list");
  double sq = 0.0;
  double labeled = 0.0;
  for (const auto& r : records) {
    const double d = static_cast<double>(r.labeled) - static_cast<double>(r.predicted);
    sq += d * d;
    labeled += static_cast<double>(r.labeled);
  }
  const double n = static_cast<double>(records.size());
  if (labeled == 0.0) {
    throw Error(ErrorCode::kUndefined, "rRMSE undefined: every labeled count is zero");
  }
  return std::sqrt(sq / n) / (labeled / n);
}

namespace {

void check_edges(const std::vector<double>& edges) {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!std::isfinite(edges[i]) || edges[i] < 0.0 || (i > 0 && !(edges[i] > edges[i - 1]))) {
      throw Error(ErrorCode::kInvalidArgument,
                  "area bin edges must be finite, non-negative and strictly increasing");
    }
  }
}

std::size_t bin_of(double a, const std::vector<double>& edges) {
  return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), a) - edges.begin());
}

void accumulate_overdetection(const std::vector<BBox>& gt, const std::vector<Prediction>& preds,
                              const std::vector<double>& edges, std::vector<std::size_t>& hits,
                              std::vector<std::size_t>& boxes) {
  for (const BBox& g : gt) {
    const std::size_t b = bin_of(area(g), edges);
    std::size_t n = 0;
    for (const auto& p : preds) n += intersection_area(g, p.box) > 0.0 ? 1 : 0;
    hits[b] += n;
    boxes[b] += 1;
  }
}

std::vector<OverdetectionBin> make_bins(const std::vector<double>& edges,
                                        const std::vector<std::size_t>& hits,
                                        const std::vector<std::size_t>& boxes) {
  std::vector<OverdetectionBin> out(edges.size() + 1);
  for (std::size_t b = 0; b < out.size(); ++b) {
    out[b].area_lower = b == 0 ? 0.0 : edges[b - 1];
    out[b].area_upper = b < edges.size() ? edges[b] : std::numeric_limits<double>::infinity();
    out[b].gt_count = boxes[b];
    out[b].mean_intersecting =
        boxes[b] == 0 ? 0.0 : static_cast<double>(hits[b]) / static_cast<double>(boxes[b]);
  }
  return out;
}

}  // namespace

std::vector<OverdetectionBin> overdetection_profile(const std::vector<BBox>& gt,
                                                    const std::vector<Prediction>& preds,
                                                    const std::vector<double>& edges) {
  check_edges(edges);
  std::vector<std::size_t> hits(edges.size() + 1, 0), boxes(edges.size() + 1, 0);
  accumulate_overdetection(gt, preds, edges, hits, boxes);
  return make_bins(edges, hits, boxes);
}

MetricsReport evaluate(const DatasetDescriptor& dataset, const std::vector<Prediction>& preds,
                       const EvalConfig& config, int workers) {
  check_edges(config.overdetection_bin_edges);
  GroundTruth gt;
  std::map<std::string, std::size_t> image_index;
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    const auto& id = dataset.images[i].image_id;
    gt.emplace(id, dataset.annotation_for(id));
    image_index.emplace(id, i);
  }

  std::vector<std::vector<Prediction>> per_image(dataset.images.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto it = image_index.find(preds[i].image_id);
    if (it == image_index.end()) {
      throw Error(ErrorCode::kDanglingReference,
                  "prediction " + std::to_string(i) + " references image '" + preds[i].image_id +
                      "' not in dataset '" + dataset.name + "'");
    }
    per_image[it->second].push_back(preds[i]);
  }

  struct ImageResult {
    ConfusionCounts counts;
    std::size_t predicted = 0;
    std::vector<std::size_t> hits, boxes;
  };
  const auto& edges = config.overdetection_bin_edges;
  std::vector<ImageResult> results(dataset.images.size());
  parallel_for(dataset.images.size(), workers, [&](std::size_t i) {
    const auto& boxes = gt.at(dataset.images[i].image_id).boxes;
    std::vector<Prediction> confident;
    for (const auto& p : per_image[i]) {
      if (p.score > config.confidence_threshold) confident.push_back(p);
    }
    ImageResult& r = results[i];
    r.counts = counts(match_detections(boxes, confident, config.iou_threshold,
                                       config.confidence_threshold));
    r.predicted = confident.size();
    r.hits.assign(edges.size() + 1, 0);
    r.boxes.assign(edges.size() + 1, 0);
    accumulate_overdetection(boxes, confident, edges, r.hits, r.boxes);
  });

  MetricsReport report;
  report.dataset = dataset.name;
  report.role = dataset.role_label.empty() ? std::string(role_to_string(dataset.role))
                                           : dataset.role_label;
  report.n_images = dataset.images.size();
  std::vector<std::size_t> hits(edges.size() + 1, 0), boxes(edges.size() + 1, 0);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const ImageMeta& meta = dataset.images[i];
    const std::size_t labeled = gt.at(meta.image_id).boxes.size();
    report.n_gt += labeled;
    report.totals += results[i].counts;
    report.per_site[meta.site] += results[i].counts;
    report.count_records.push_back({meta.image_id, labeled, results[i].predicted});
    for (std::size_t b = 0; b < hits.size(); ++b) {
      hits[b] += results[i].hits[b];
      boxes[b] += results[i].boxes[b];
    }
  }
  report.accuracy = accuracy(report.totals);
  report.rrmse = rrmse(report.count_records);
  report.curve = pr_curve(gt, preds, config.iou_threshold);
  report.ap = average_precision(gt, preds, config.iou_threshold, config.recall_points);
  report.overdetection = make_bins(edges, hits, boxes);
  return report;
}

std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string metrics_csv_header() { return "dataset,role,ap,accuracy,rrmse,tp,fp,fn\n"; }

std::string metrics_csv_row(const MetricsReport& r) {
  std::ostringstream os;
  os << r.dataset << ',' << r.role << ',' << csv_number(r.ap) << ',' << csv_number(r.accuracy)
     << ',' << csv_number(r.rrmse) << ',' << r.totals.tp << ',' << r.totals.fp << ','
     << r.totals.fn << '\n';
  return os.str();
}

std::string pr_curve_csv(const PRCurve& c) {
  std::string out = "recall,precision\n";
  for (const auto& p : c.points) out += csv_number(p.recall) + "," + csv_number(p.precision) + "\n";
  return out;
}

std::string overdetection_csv(const std::vector<OverdetectionBin>& bins) {
  std::string out = "area_lower,area_upper,gt_count,mean_intersecting\n";
  for (const auto& b : bins) {
    out += csv_number(b.area_lower) + "," + csv_number(b.area_upper) + "," +
           std::to_string(b.gt_count) + "," + csv_number(b.mean_intersecting) + "\n";
  }
  return out;
}

}  // namespace plantres
