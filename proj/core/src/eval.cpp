#include "tubekit/eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace tubekit {

GroundTruthInstance make_ground_truth(std::string image_id, Polygon polygon, const MedialConfig& cfg) {
  const Curvature c = classify_curvature(fit_tube(polygon, cfg).axis());
  return {std::move(image_id), std::move(polygon), c};
}

MatchResult match_detections(const std::vector<PolygonDetection>& dets, const std::vector<GroundTruthInstance>& gts,
                             double iou_threshold) {
  std::map<std::string, std::vector<std::size_t>> by_image;
  for (std::size_t i = 0; i < gts.size(); ++i) by_image[gts[i].image_id].push_back(i);

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  MatchResult out;
  out.labels.reserve(dets.size());
  std::vector<bool> taken(gts.size(), false);
  std::vector<std::string> unknown;
  for (std::size_t di : order) {
    const PolygonDetection& d = dets[di];
    MatchLabel label{d.score, false, di, std::nullopt};
    auto it = by_image.find(d.image_id);
    if (it == by_image.end()) {
      if (std::find(unknown.begin(), unknown.end(), d.image_id) == unknown.end()) unknown.push_back(d.image_id);
      out.labels.push_back(label);
      continue;
    }
    double best_iou = -1.0;
    std::size_t best = 0;
    for (std::size_t gi : it->second) {
      if (taken[gi]) continue;
      const double iou = polygon_iou(d.polygon, gts[gi].polygon);
      if (iou > best_iou) {
        best_iou = iou;
        best = gi;
      }
    }
    if (best_iou > iou_threshold) {
      taken[best] = true;
      label.is_tp = true;
      label.gt = best;
    }
    out.labels.push_back(label);
  }
  for (const std::string& id : unknown) {
    out.warnings.push_back("detections on image '" + id + "' which has no ground truth; counted as false positives");
  }
  return out;
}

double f_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

EvalReport pr_curve(std::vector<MatchLabel> labels, std::size_t n_gt) {
  if (n_gt == 0) throw EvalError("cannot evaluate against zero ground-truth instances");
  std::stable_sort(labels.begin(), labels.end(),
                   [](const MatchLabel& a, const MatchLabel& b) { return a.score > b.score; });
  EvalReport r;
  r.n_gt = n_gt;
  r.n_det = labels.size();
  std::size_t tp = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].is_tp) ++tp;
    const double p = static_cast<double>(tp) / static_cast<double>(i + 1);
    const double rec = static_cast<double>(tp) / static_cast<double>(n_gt);
    r.pr_points.push_back({labels[i].score, p, rec});
    const double f = f_score(p, rec);
    if (f > r.max_f) {
      r.max_f = f;
      r.p_at_max_f = p;
      r.r_at_max_f = rec;
    }
  }
  // All-points interpolation: integrate the running maximum of precision
  // taken from the low-score end.
  double envelope = 0.0;
  std::vector<double> interp(r.pr_points.size());
  for (std::size_t i = r.pr_points.size(); i-- > 0;) {
    envelope = std::max(envelope, r.pr_points[i].precision);
    interp[i] = envelope;
  }
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < r.pr_points.size(); ++i) {
    r.average_precision += (r.pr_points[i].recall - prev_recall) * interp[i];
    prev_recall = r.pr_points[i].recall;
  }
  return r;
}

double subset_recall(const std::vector<PolygonDetection>& dets, const std::vector<GroundTruthInstance>& gts,
                     Curvature subset, double iou_threshold) {
  const auto n = static_cast<std::size_t>(
      std::count_if(gts.begin(), gts.end(), [&](const GroundTruthInstance& g) { return g.subset == subset; }));
  if (n == 0) throw EvalError(std::string("the ") + to_string(subset) + " subset is empty");
  std::size_t hit = 0;
  for (const MatchLabel& l : match_detections(dets, gts, iou_threshold).labels) {
    if (l.gt && gts[*l.gt].subset == subset) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(n);
}

}  // namespace tubekit
