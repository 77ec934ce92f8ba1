#include <cmath>
#include <optional>

#include "tubekit/loss.hpp"

namespace tubekit {
namespace {

constexpr double kGradientTolerance = 1e-6;  // on the unit-length proximal step
constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;

std::optional<Tube> try_tube(std::vector<Point2> pts, double radius) {
  try {
    return Tube(PolyChain(std::move(pts)), radius);
  } catch (const GeometryError&) {
    return std::nullopt;
  }
}

double l1(Point2 a, Point2 b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

// Proximal map of t * |v - target|: move toward the target by at most t.
double shrink(double v, double target, double t) {
  const double d = v - target;
  if (std::abs(d) <= t) return target;
  return v - (d > 0.0 ? t : -t);
}

Point2 shrink(Point2 p, Point2 target, double t) { return {shrink(p.x, target.x, t), shrink(p.y, target.y, t)}; }

}  // namespace

const char* to_string(DescentStop s) {
  switch (s) {
    case DescentStop::converged:
      return "converged";
    case DescentStop::max_iterations:
      return "max_iterations";
    case DescentStop::line_search_exhausted:
      return "line_search_exhausted";
  }
  return "?";
}

DescentResult fit_tube_descent(const Tube& init, const Tube& gt, const LossConfig& cfg, std::size_t max_iters,
                               double step) {
  if (!(step > 0.0 && std::isfinite(step))) throw std::invalid_argument("descent step must be positive");
  cfg.validate();

  // The radius and endpoint terms are plain L1 distances to fixed targets, so
  // they are handled by their proximal map (soft-thresholding toward the
  // target) while the axis and spread terms take an ordinary gradient step.
  LossConfig smooth_cfg = cfg;
  smooth_cfg.term_weights[0] = 0.0;
  smooth_cfg.term_weights[2] = 0.0;
  const double scale = cfg.normalize_by_radius ? 1.0 / gt.radius() : 1.0;
  const double w_radius = cfg.term_weights[0] * scale;
  const double w_ends = cfg.term_weights[2] * scale;

  DescentResult out{init, loss_tube(init, gt, cfg).total, {}, 0, DescentStop::max_iterations};
  if (!std::isfinite(out.initial_loss)) throw DescentError("initial loss is not finite", {});
  double f = out.initial_loss;
  double eta = step;

  while (out.iterations < max_iters) {
    const Tube& x = out.tube;
    const std::vector<Point2>& xp = x.axis().points();
    const TubeGradient g = grad_loss_tube(x, gt, smooth_cfg, 0.0);

    const PolyChain& ga = gt.axis();
    const bool same = l1(xp.front(), ga.front()) + l1(xp.back(), ga.back()) <=
                      l1(xp.front(), ga.back()) + l1(xp.back(), ga.front());
    const Point2 target_front = same ? ga.front() : ga.back();
    const Point2 target_back = same ? ga.back() : ga.front();

    auto proposal = [&](double h, std::vector<Point2>& pts, double& r) {
      pts = xp;
      for (std::size_t i = 0; i < pts.size(); ++i) pts[i] -= h * g.d_points[i];
      pts.front() = shrink(pts.front(), target_front, h * w_ends);
      pts.back() = shrink(pts.back(), target_back, h * w_ends);
      r = shrink(x.radius() - h * g.d_radius, gt.radius(), h * w_radius);
    };

    // Stationarity: the proximal step with unit length does not move.
    {
      std::vector<Point2> pts;
      double r = 0.0;
      proposal(1.0, pts, r);
      double moved2 = (r - x.radius()) * (r - x.radius());
      for (std::size_t i = 0; i < pts.size(); ++i) moved2 += dot(pts[i] - xp[i], pts[i] - xp[i]);
      if (std::sqrt(moved2) < kGradientTolerance) {
        out.stop = DescentStop::converged;
        return out;
      }
    }

    bool accepted = false;
    for (int k = 0; k < kMaxHalvings; ++k, eta *= 0.5) {
      std::vector<Point2> pts;
      double r = 0.0;
      proposal(eta, pts, r);
      double moved2 = (r - x.radius()) * (r - x.radius());
      for (std::size_t i = 0; i < pts.size(); ++i) moved2 += dot(pts[i] - xp[i], pts[i] - xp[i]);
      if (moved2 == 0.0) break;
      std::optional<Tube> candidate = try_tube(std::move(pts), r);
      if (!candidate) continue;
      const double f_new = loss_tube(*candidate, gt, cfg).total;
      if (!std::isfinite(f_new)) throw DescentError("loss became non-finite", out.trajectory);
      if (f_new <= f - kArmijo * moved2 / eta) {
        out.tube = std::move(*candidate);
        f = f_new;
        out.trajectory.push_back(f);
        ++out.iterations;
        accepted = true;
        eta *= 2.0;
        break;
      }
    }
    if (!accepted) {
      out.stop = DescentStop::line_search_exhausted;
      return out;
    }
  }
  out.stop = DescentStop::max_iterations;
  return out;
}

}  // namespace tubekit
