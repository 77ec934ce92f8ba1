#include "tubekit/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tubekit {
namespace {

double angle_of(Point2 a, Point2 b) { return std::atan2(b.y - a.y, b.x - a.x); }

double abs_kernel(double d2, double sigma) { return std::exp(-d2 / (2.0 * sigma * sigma)); }

double tan_kernel(double delta, double sigma_t) {
  const double s = std::sin(delta);
  return std::exp(-s * s / (2.0 * sigma_t * sigma_t));
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double l1(Point2 a, Point2 b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

// Closest-point query that also reports whether `p` sits where the distance
// (ridge between distinct feet) or the attained tangent (switch between
// segments sharing the foot) changes non-smoothly.
struct Projection {
  ChainProjection best;
  bool distance_kink = false;
  bool tangent_jump = false;
};

Projection project_checked(Point2 p, std::span<const Point2> pts, double tol) {
  Projection out;
  out.best = project_to_points(p, pts);
  if (!(tol > 0.0)) return out;
  const std::size_t k = out.best.segment;
  // Signed position of p's projection past the end of segment i that touches
  // vertex v (positive once the foot is clamped to v).
  auto past = [&](std::size_t i, std::size_t v) {
    const Point2 d = pts[i + 1] - pts[i];
    const double along = dot(p - pts[i], d) / norm(d);
    return v == i ? -along : along - norm(d);
  };
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (i == k) continue;
    const ChainProjection other = project_to_points(p, pts.subspan(i, 2));
    if (other.distance - out.best.distance > tol) continue;
    const bool adjacent = i + 1 == k || k + 1 == i;
    if (adjacent) {
      // Neighbours meet at a shared vertex; where either foot is clamped to
      // it the distance stays C1, but the attained tangent switches at the
      // edge of the clamp region.
      const std::size_t v = std::max(i, k);
      const double pi = past(i, v);
      const double pk = past(k, v);
      if (pi >= -tol || pk >= -tol) {
        const double turn = std::sin(angle_of(pts[i], pts[i + 1]) - out.best.tangent_angle);
        if (std::abs(turn) > 1e-12 && (std::abs(pi) <= tol || std::abs(pk) <= tol)) out.tangent_jump = true;
        continue;
      }
    }
    if (distance(other.foot, out.best.foot) > tol) {
      out.distance_kink = true;
      out.tangent_jump = true;
    }
  }
  return out;
}

void note(TubeGradient* g, const std::string& why) {
  if (g == nullptr) return;
  g->smooth = false;
  if (std::find(g->nonsmooth.begin(), g->nonsmooth.end(), why) == g->nonsmooth.end()) g->nonsmooth.push_back(why);
}

// d(theta)/d(b) for theta = atan2(b - a); d/d(a) is the negation.
Point2 angle_gradient(Point2 a, Point2 b) {
  const Point2 d = b - a;
  const double len2 = dot(d, d);
  return Point2{-d.y, d.x} / len2;
}

}  // namespace

void LossConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (sigma_abs && !(*sigma_abs > 0.0 && std::isfinite(*sigma_abs))) {
    throw std::invalid_argument("sigma_abs must be positive");
  }
  if (!(sigma_tan > 0.0 && std::isfinite(sigma_tan))) throw std::invalid_argument("sigma_tan must be positive");
  if (n_samples < 2) throw std::invalid_argument("n_samples must be at least 2");
  if (n_points < 2) throw std::invalid_argument("n_points must be at least 2");
  for (double w : term_weights) {
    if (!(w >= 0.0 && std::isfinite(w))) throw std::invalid_argument("term weights must be non-negative");
  }
}

double s_abs(const PolyChain& pred, const PolyChain& gt, double sigma, std::size_t m) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  double sum = 0.0;
  for (const ChainSample& s : arc_length_sample(pred, m)) {
    const double d = project_to_chain(s.point, gt).distance;
    sum += abs_kernel(d * d, sigma);
  }
  return sum / static_cast<double>(m);
}

double s_tan(const PolyChain& pred, const PolyChain& gt, double sigma_t, std::size_t m) {
  if (!(sigma_t > 0.0)) throw std::invalid_argument("sigma_t must be positive");
  double sum = 0.0;
  for (const ChainSample& s : arc_length_sample(pred, m)) {
    sum += tan_kernel(s.tangent_angle - project_to_chain(s.point, gt).tangent_angle, sigma_t);
  }
  return sum / static_cast<double>(m);
}

double loss_axis(const PolyChain& pred, const PolyChain& gt, const LossConfig& cfg, double sigma_abs) {
  double sa = s_abs(pred, gt, sigma_abs, cfg.n_samples);
  double st = s_tan(pred, gt, cfg.sigma_tan, cfg.n_samples);
  if (cfg.symmetric) {
    sa = 0.5 * (sa + s_abs(gt, pred, sigma_abs, cfg.n_samples));
    st = 0.5 * (st + s_tan(gt, pred, cfg.sigma_tan, cfg.n_samples));
  }
  return 1.0 - cfg.alpha * sa - (1.0 - cfg.alpha) * st;
}

double loss_spread(std::span<const Point2> pred, double gt_length, std::size_t n_points) {
  if (pred.size() < 2 || n_points < 2) throw std::invalid_argument("loss_spread needs at least two points");
  if (!(gt_length > 0.0)) throw std::invalid_argument("loss_spread needs a positive gt length");
  const double threshold = gt_length / (2.0 * static_cast<double>(n_points - 1));
  double d_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < pred.size(); ++i) d_min = std::min(d_min, distance(pred[i], pred[i + 1]));
  return std::max(0.0, threshold - d_min);
}

double loss_endpoints(const PolyChain& pred, const PolyChain& gt) {
  const double same = l1(pred.front(), gt.front()) + l1(pred.back(), gt.back());
  const double flipped = l1(pred.front(), gt.back()) + l1(pred.back(), gt.front());
  return std::min(same, flipped);
}

double loss_radius(double pred_r, double gt_r) { return std::abs(pred_r - gt_r); }

FrozenTubeObjective::FrozenTubeObjective(const Tube& pred, const Tube& gt, const LossConfig& cfg)
    : gt_(gt), cfg_(cfg), sigma_abs_(cfg.sigma_abs_for(gt)) {
  cfg_.validate();
  for (const ChainSample& s : arc_length_sample(pred.axis(), cfg_.n_samples)) slots_.push_back({s.segment, s.fraction});
  if (cfg_.symmetric) gt_samples_ = arc_length_sample(gt.axis(), cfg_.n_samples);
  point_count_ = pred.point_count();
}

double FrozenTubeObjective::value(std::span<const Point2> points, double radius) const {
  return evaluate(points, radius, nullptr, 0.0, nullptr);
}

TubeGradient FrozenTubeObjective::gradient(std::span<const Point2> points, double radius, double tolerance) const {
  TubeGradient g;
  evaluate(points, radius, &g, tolerance, nullptr);
  return g;
}

double FrozenTubeObjective::evaluate(std::span<const Point2> points, double radius, TubeGradient* grad,
                                     double tolerance, LossReport* report) const {
  if (points.size() != point_count_) {
    throw std::invalid_argument("expected " + std::to_string(point_count_) + " points, got " +
                                std::to_string(points.size()));
  }
  const auto& gpts = gt_.axis().points();
  const std::size_t n = points.size();
  const double m = static_cast<double>(cfg_.n_samples);
  const double sigma = sigma_abs_;
  const double st2 = 2.0 * cfg_.sigma_tan * cfg_.sigma_tan;
  const double tol = tolerance * gt_.radius();
  const double direction_weight = cfg_.symmetric ? 0.5 : 1.0;

  std::vector<Point2> d_abs(n), d_tan(n);
  double sum_abs = 0.0;
  double sum_tan = 0.0;
  bool dist_kink = false;
  bool tan_jump = false;

  // Prediction samples measured against the ground truth.
  for (const Slot& slot : slots_) {
    const Point2 a = points[slot.segment];
    const Point2 b = points[slot.segment + 1];
    const double u = slot.fraction;
    const Point2 q = (1.0 - u) * a + u * b;
    const Projection pr = project_checked(q, gpts, grad ? tol : 0.0);
    dist_kink |= pr.distance_kink;
    tan_jump |= pr.tangent_jump;
    const Point2 diff = q - pr.best.foot;
    const double ea = abs_kernel(dot(diff, diff), sigma);
    const double delta = angle_of(a, b) - pr.best.tangent_angle;
    const double et = tan_kernel(delta, cfg_.sigma_tan);
    sum_abs += ea;
    sum_tan += et;
    if (grad) {
      const Point2 gq = (-ea / (sigma * sigma)) * diff;
      d_abs[slot.segment] += (1.0 - u) * gq;
      d_abs[slot.segment + 1] += u * gq;
      const Point2 ga = (-et * std::sin(2.0 * delta) / st2) * angle_gradient(a, b);
      d_tan[slot.segment + 1] += ga;
      d_tan[slot.segment] -= ga;
    }
  }
  double sa = sum_abs / m;
  double st = sum_tan / m;
  if (grad) {
    for (std::size_t i = 0; i < n; ++i) {
      d_abs[i] = (direction_weight / m) * d_abs[i];
      d_tan[i] = (direction_weight / m) * d_tan[i];
    }
  }

  // Ground-truth samples measured against the prediction.
  if (cfg_.symmetric) {
    double back_abs = 0.0;
    double back_tan = 0.0;
    const double w = direction_weight / m;
    for (const ChainSample& g : gt_samples_) {
      const Projection pr = project_checked(g.point, points, grad ? tol : 0.0);
      dist_kink |= pr.distance_kink;
      tan_jump |= pr.tangent_jump;
      const Point2 diff = g.point - pr.best.foot;
      const double ea = abs_kernel(dot(diff, diff), sigma);
      const double delta = pr.best.tangent_angle - g.tangent_angle;
      const double et = tan_kernel(delta, cfg_.sigma_tan);
      back_abs += ea;
      back_tan += et;
      if (grad) {
        const std::size_t k = pr.best.segment;
        const double u = pr.best.fraction;
        const Point2 gf = (w * ea / (sigma * sigma)) * diff;
        d_abs[k] += (1.0 - u) * gf;
        d_abs[k + 1] += u * gf;
        const Point2 ga = (-w * et * std::sin(2.0 * delta) / st2) * angle_gradient(points[k], points[k + 1]);
        d_tan[k + 1] += ga;
        d_tan[k] -= ga;
      }
    }
    sa = 0.5 * (sa + back_abs / m);
    st = 0.5 * (st + back_tan / m);
  }

  const double scale = cfg_.normalize_by_radius ? 1.0 / gt_.radius() : 1.0;
  const auto& wts = cfg_.term_weights;

  LossReport r;
  r.s_abs = sa;
  r.s_tan = st;
  r.axis_term = 1.0 - cfg_.alpha * sa - (1.0 - cfg_.alpha) * st;

  // Radius.
  r.radius_term = scale * loss_radius(radius, gt_.radius());

  // Endpoints, direction-agnostic.
  const Point2 p0 = points.front();
  const Point2 pn = points.back();
  const Point2 g0 = gpts.front();
  const Point2 gn = gpts.back();
  const double same = l1(p0, g0) + l1(pn, gn);
  const double flipped = l1(p0, gn) + l1(pn, g0);
  const bool use_same = same <= flipped;
  const Point2 e0 = use_same ? g0 : gn;
  const Point2 en = use_same ? gn : g0;
  r.endpoints_term = scale * std::min(same, flipped);

  // Spread.
  const double threshold = gt_.axis().length() / (2.0 * static_cast<double>(cfg_.n_points - 1));
  std::size_t shortest = 0;
  double d_min = std::numeric_limits<double>::infinity();
  double d_second = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = distance(points[i], points[i + 1]);
    if (d < d_min) {
      d_second = d_min;
      d_min = d;
      shortest = i;
    } else {
      d_second = std::min(d_second, d);
    }
  }
  r.spread_term = scale * std::max(0.0, threshold - d_min);

  r.total = wts[0] * r.radius_term + wts[1] * r.axis_term + wts[2] * r.endpoints_term + wts[3] * r.spread_term;
  if (report) *report = r;

  if (grad) {
    grad->d_points.assign(n, Point2{});
    const double w_axis = wts[1];
    for (std::size_t i = 0; i < n; ++i) {
      grad->d_points[i] = -w_axis * (cfg_.alpha * d_abs[i] + (1.0 - cfg_.alpha) * d_tan[i]);
    }
    if (dist_kink) note(grad, "closest-point tie on the ground-truth axis");
    if (tan_jump) note(grad, "closest-segment switch with differing tangent");

    grad->d_radius = wts[0] * scale * sign(radius - gt_.radius());
    if (std::abs(radius - gt_.radius()) <= tol) note(grad, "radius equals ground truth (L1 kink)");

    const double we = wts[2] * scale;
    grad->d_points.front() += we * Point2{sign(p0.x - e0.x), sign(p0.y - e0.y)};
    grad->d_points.back() += we * Point2{sign(pn.x - en.x), sign(pn.y - en.y)};
    if (std::abs(same - flipped) <= tol) note(grad, "endpoint pairing tie");
    for (double v : {p0.x - e0.x, p0.y - e0.y, pn.x - en.x, pn.y - en.y}) {
      if (std::abs(v) <= tol) note(grad, "endpoint coordinate equals ground truth (L1 kink)");
    }

    if (d_min <= tol) {
      note(grad, "coincident consecutive points");
    } else if (threshold - d_min > 0.0) {
      const Point2 dir = (points[shortest + 1] - points[shortest]) / d_min;
      const double ws = wts[3] * scale;
      grad->d_points[shortest + 1] -= ws * dir;
      grad->d_points[shortest] += ws * dir;
      if (d_second - d_min <= tol) note(grad, "shortest-segment tie");
    }
    if (std::abs(threshold - d_min) <= tol) note(grad, "shortest segment at the spread threshold");
  }
  return r.total;
}

LossReport loss_tube(const Tube& pred, const Tube& gt, const LossConfig& cfg) {
  if (pred.point_count() != cfg.n_points) {
    throw std::invalid_argument("predicted tube has " + std::to_string(pred.point_count()) +
                                " points, config expects " + std::to_string(cfg.n_points));
  }
  const FrozenTubeObjective obj(pred, gt, cfg);
  LossReport r;
  obj.evaluate(pred.axis().points(), pred.radius(), nullptr, 0.0, &r);
  return r;
}

TubeGradient grad_loss_tube(const Tube& pred, const Tube& gt, const LossConfig& cfg, double tolerance) {
  if (pred.point_count() != cfg.n_points) {
    throw std::invalid_argument("predicted tube has " + std::to_string(pred.point_count()) +
                                " points, config expects " + std::to_string(cfg.n_points));
  }
  return FrozenTubeObjective(pred, gt, cfg).gradient(pred.axis().points(), pred.radius(), tolerance);
}

}  // namespace tubekit
