#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tubekit/geometry.hpp"
#include "tubekit/tube.hpp"

namespace tubekit {

struct LossConfig {
  double alpha = 0.5;
  /// Distance kernel width in pixels; unset means the ground-truth radius.
  std::optional<double> sigma_abs;
  double sigma_tan = 0.5;
  std::size_t n_samples = 100;
  std::size_t n_points = 5;
  /// Weights of the radius, axis, endpoints and spread terms, in that order.
  std::array<double, 4> term_weights{1.0, 1.0, 1.0, 1.0};
  /// Average the similarity in both directions (prediction->gt and gt->prediction).
  bool symmetric = false;
  /// Divide the pixel-valued terms (radius, endpoints, spread) by the gt radius.
  bool normalize_by_radius = false;

  void validate() const;
  double sigma_abs_for(const Tube& gt) const { return sigma_abs.value_or(gt.radius()); }
};

struct LossReport {
  double radius_term = 0.0;
  double axis_term = 0.0;
  double endpoints_term = 0.0;
  double spread_term = 0.0;
  double total = 0.0;
  double s_abs = 0.0;
  double s_tan = 0.0;
};

struct TubeGradient {
  std::vector<Point2> d_points;
  double d_radius = 0.0;
  /// False when the configuration sits on (or within the tolerance of) a
  /// point where the objective is not differentiable; `nonsmooth` says why.
  bool smooth = true;
  std::vector<std::string> nonsmooth;
};

/// Mean over `m` samples of exp(-d^2 / 2 sigma^2), d the distance from a
/// sample of `pred` to `gt`.
double s_abs(const PolyChain& pred, const PolyChain& gt, double sigma, std::size_t m);

/// Mean over `m` samples of exp(-sin^2(theta_pred - theta_gt) / 2 sigma_t^2),
/// with theta_gt the tangent at the closest point of `gt`.
double s_tan(const PolyChain& pred, const PolyChain& gt, double sigma_t, std::size_t m);

double loss_axis(const PolyChain& pred, const PolyChain& gt, const LossConfig& cfg, double sigma_abs);

/// max(0, l / (2 (n - 1)) - shortest segment). Takes raw points because
/// coincident points are exactly the case it penalizes.
double loss_spread(std::span<const Point2> pred, double gt_length, std::size_t n_points);

/// Smaller of the two endpoint pairings' summed L1 distances.
double loss_endpoints(const PolyChain& pred, const PolyChain& gt);

double loss_radius(double pred_r, double gt_r);

/// All four terms. Throws std::invalid_argument if pred does not have
/// cfg.n_points points.
LossReport loss_tube(const Tube& pred, const Tube& gt, const LossConfig& cfg);

/// Gradient of loss_tube with each sample's (segment, fraction) held at its
/// current value. Non-smooth loci within `tolerance` (relative to the gt
/// radius) are reported in the result.
TubeGradient grad_loss_tube(const Tube& pred, const Tube& gt, const LossConfig& cfg, double tolerance = 1e-9);

/// loss_tube with the prediction's sample allocation fixed at construction.
/// Matches loss_tube at the construction point; its derivative there is
/// grad_loss_tube. Points passed to value() need not form a valid chain.
class FrozenTubeObjective {
 public:
  FrozenTubeObjective(const Tube& pred, const Tube& gt, const LossConfig& cfg);

  double value(std::span<const Point2> points, double radius) const;
  TubeGradient gradient(std::span<const Point2> points, double radius, double tolerance = 1e-9) const;

 private:
  struct Slot {
    std::size_t segment;
    double fraction;
  };
  double evaluate(std::span<const Point2> points, double radius, TubeGradient* grad, double tolerance,
                  LossReport* report) const;

  Tube gt_;
  LossConfig cfg_;
  double sigma_abs_;
  std::vector<Slot> slots_;
  std::vector<ChainSample> gt_samples_;
  std::size_t point_count_ = 0;

  friend LossReport loss_tube(const Tube&, const Tube&, const LossConfig&);
};

enum class DescentStop { converged, max_iterations, line_search_exhausted };

const char* to_string(DescentStop s);

struct DescentResult {
  Tube tube;
  double initial_loss = 0.0;
  /// Loss after each accepted step; empty when the start is already stationary.
  std::vector<double> trajectory;
  std::size_t iterations = 0;
  DescentStop stop = DescentStop::converged;
};

/// Raised when the loss becomes non-finite during descent.
class DescentError : public std::runtime_error {
 public:
  DescentError(const std::string& what, std::vector<double> trajectory)
      : std::runtime_error(what), trajectory_(std::move(trajectory)) {}
  const std::vector<double>& trajectory() const { return trajectory_; }

 private:
  std::vector<double> trajectory_;
};

/// Descent on loss_tube with backtracking: a gradient step on the axis and
/// spread terms, followed by soft-thresholding toward the targets of the L1
/// radius and endpoint terms (a proximal-gradient step). A step is accepted
/// when the total loss drops by a sufficient amount; steps that would produce
/// an invalid tube count as rejections. Stops when the unit-length step moves
/// less than 1e-6, after `max_iters` accepted steps, or when no acceptable
/// step is found after repeated halving.
DescentResult fit_tube_descent(const Tube& init, const Tube& gt, const LossConfig& cfg, std::size_t max_iters,
                               double step);

}  // namespace tubekit
