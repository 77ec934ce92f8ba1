#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tubekit/geometry.hpp"
#include "tubekit/medial.hpp"

namespace tubekit {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GroundTruthInstance {
  std::string image_id;
  Polygon polygon;
  Curvature subset = Curvature::straight;
};

/// Ground truth whose subset comes from the curvature of its fitted tube axis.
GroundTruthInstance make_ground_truth(std::string image_id, Polygon polygon, const MedialConfig& cfg = {});

struct PolygonDetection {
  std::string image_id;
  Polygon polygon;
  double score = 0.0;
};

struct MatchLabel {
  double score = 0.0;
  bool is_tp = false;
  std::size_t detection = 0;          ///< index into the input detections
  std::optional<std::size_t> gt;      ///< matched ground truth, for true positives
};

struct MatchResult {
  /// One label per detection, by descending score (ties by input index).
  std::vector<MatchLabel> labels;
  std::vector<std::string> warnings;
};

/// Greedy matching: in score order, each detection takes the unmatched ground
/// truth of its image with the highest IoU if that IoU is strictly above
/// `iou_threshold`; otherwise it is a false positive. Detections on images
/// with no ground truth are false positives and produce a warning.
MatchResult match_detections(const std::vector<PolygonDetection>& dets, const std::vector<GroundTruthInstance>& gts,
                             double iou_threshold = 0.5);

struct PrPoint {
  double score = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct EvalReport {
  std::vector<PrPoint> pr_points;  ///< one per rank, descending score
  double average_precision = 0.0;
  double max_f = 0.0;
  double p_at_max_f = 0.0;
  double r_at_max_f = 0.0;
  std::size_t n_gt = 0;
  std::size_t n_det = 0;
};

/// Harmonic mean 2PR / (P + R); zero when both are zero.
double f_score(double precision, double recall);

/// Precision/recall down the ranking, all-points interpolated AP, and the
/// operating point of maximal F. Throws EvalError when n_gt is zero.
EvalReport pr_curve(std::vector<MatchLabel> labels, std::size_t n_gt);

/// Fraction of the ground truths in `subset` matched by some detection. The
/// other subset still takes part in matching (and can absorb detections) but
/// is left out of the ratio. Throws EvalError for an empty subset.
double subset_recall(const std::vector<PolygonDetection>& dets, const std::vector<GroundTruthInstance>& gts,
                     Curvature subset, double iou_threshold = 0.5);

}  // namespace tubekit
