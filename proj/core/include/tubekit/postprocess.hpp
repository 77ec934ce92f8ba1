#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tubekit/geometry.hpp"
#include "tubekit/tube.hpp"

namespace tubekit {

struct Box {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double area() const { return (xmax - xmin) * (ymax - ymin); }
};

double box_iou(const Box& a, const Box& b);

struct BoxDetection {
  Box box;
  double score = 0.0;
  /// Stable identity used to break score ties.
  std::size_t id = 0;
};

/// Throws std::invalid_argument for an empty box or a score outside [0, 1].
void validate(const BoxDetection& d);

struct SoftNmsConfig {
  double iou_threshold = 0.5;
  double decay_sigma = 0.5;
  double score_floor = 0.001;
};

/// Gaussian soft-NMS: repeatedly select the highest-scoring box and multiply
/// the score of every remaining box overlapping it by more than the threshold
/// by exp(-IoU^2 / decay_sigma). Boxes whose score falls below the floor are
/// dropped. Output is sorted by descending score, ties by id.
std::vector<BoxDetection> soft_nms(std::vector<BoxDetection> dets, const SoftNmsConfig& cfg = {});

struct TubeDetection {
  Tube tube;
  double score = 0.0;
  std::string image_id;
  std::size_t id = 0;
};

class NmsError : public std::runtime_error {
 public:
  NmsError(const std::string& what, std::size_t id) : std::runtime_error(what), id_(id) {}
  std::size_t detection_id() const { return id_; }

 private:
  std::size_t id_;
};

/// Greedy hard NMS on tube envelopes of one image: in descending score order
/// (ties by id), keep a detection iff its envelope IoU with every kept one is
/// at most `iou_threshold`. Envelope failures raise NmsError naming the id.
std::vector<TubeDetection> polygonal_nms(std::vector<TubeDetection> dets, double iou_threshold = 0.5,
                                         std::size_t cap_segments = 8);

}  // namespace tubekit
