#include "tubekit/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "tubekit/medial.hpp"

namespace tubekit {
namespace {

template <class D>
bool by_score(const D& a, const D& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

}  // namespace

double box_iou(const Box& a, const Box& b) {
  const double w = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double h = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  const double inter = w * h;
  return inter / (a.area() + b.area() - inter);
}

void validate(const BoxDetection& d) {
  if (!(d.box.xmin < d.box.xmax && d.box.ymin < d.box.ymax)) {
    throw std::invalid_argument("detection " + std::to_string(d.id) + ": box must have xmin < xmax and ymin < ymax");
  }
  if (!(d.score >= 0.0 && d.score <= 1.0)) {
    throw std::invalid_argument("detection " + std::to_string(d.id) + ": score outside [0, 1]");
  }
}

std::vector<BoxDetection> soft_nms(std::vector<BoxDetection> dets, const SoftNmsConfig& cfg) {
  for (const BoxDetection& d : dets) validate(d);
  std::vector<BoxDetection> out;
  out.reserve(dets.size());
  while (!dets.empty()) {
    auto best = std::min_element(dets.begin(), dets.end(), by_score<BoxDetection>);
    const BoxDetection selected = *best;
    dets.erase(best);
    out.push_back(selected);
    std::vector<BoxDetection> rest;
    rest.reserve(dets.size());
    for (BoxDetection& d : dets) {
      const double iou = box_iou(selected.box, d.box);
      if (iou > cfg.iou_threshold) d.score *= std::exp(-iou * iou / cfg.decay_sigma);
      if (d.score >= cfg.score_floor) rest.push_back(d);
    }
    dets = std::move(rest);
  }
  std::stable_sort(out.begin(), out.end(), by_score<BoxDetection>);
  return out;
}

std::vector<TubeDetection> polygonal_nms(std::vector<TubeDetection> dets, double iou_threshold,
                                         std::size_t cap_segments) {
  std::stable_sort(dets.begin(), dets.end(), by_score<TubeDetection>);
  std::vector<TubeDetection> kept;
  std::vector<Polygon> kept_envelopes;
  for (TubeDetection& d : dets) {
    std::optional<Polygon> env;
    try {
      env.emplace(tube_envelope(d.tube, cap_segments));
    } catch (const std::exception& e) {
      throw NmsError("detection " + std::to_string(d.id) + ": " + e.what(), d.id);
    }
    const bool suppressed = std::any_of(kept_envelopes.begin(), kept_envelopes.end(),
                                        [&](const Polygon& k) { return polygon_iou(*env, k) > iou_threshold; });
    if (suppressed) continue;
    kept_envelopes.push_back(std::move(*env));
    kept.push_back(std::move(d));
  }
  return kept;
}

}  // namespace tubekit
