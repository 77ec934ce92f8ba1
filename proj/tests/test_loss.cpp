#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "oracles.hpp"
#include "tubekit/loss.hpp"
#include "tubekit/medial.hpp"
#include "tubekit/synthetic.hpp"

using namespace tubekit;

namespace {

LossConfig with_sigma(double sigma) {
  LossConfig c;
  c.sigma_abs = sigma;
  return c;
}

Tube straight(double y, double radius = 2.0, double length = 10.0) {
  std::vector<Point2> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({length * i / 4.0, y});
  return Tube(PolyChain(pts), radius);
}

// Standalone evaluation of the frozen-allocation objective (one-directional
// form): samples are fixed (segment, fraction) pairs computed from `base`,
// projections are brute force.
struct FrozenOracle {
  struct Slot {
    std::size_t seg;
    double frac;
  };
  std::vector<Slot> slots;
  std::vector<Point2> gt;
  double gt_r, sigma, sigma_t, alpha, gt_len;
  std::size_t n_points;

  FrozenOracle(const std::vector<Point2>& base, const std::vector<Point2>& gt_pts, double gt_radius,
               const LossConfig& cfg)
      : gt(gt_pts), gt_r(gt_radius), sigma(cfg.sigma_abs.value_or(gt_radius)), sigma_t(cfg.sigma_tan),
        alpha(cfg.alpha), n_points(cfg.n_points) {
    std::vector<double> cum{0.0};
    for (std::size_t i = 0; i + 1 < base.size(); ++i) cum.push_back(cum.back() + std::hypot(base[i + 1].x - base[i].x, base[i + 1].y - base[i].y));
    for (std::size_t j = 0; j < cfg.n_samples; ++j) {
      const double s = cum.back() * static_cast<double>(j) / static_cast<double>(cfg.n_samples - 1);
      std::size_t k = 0;
      while (k + 2 < base.size() && cum[k + 1] < s) ++k;
      slots.push_back({k, std::clamp((s - cum[k]) / (cum[k + 1] - cum[k]), 0.0, 1.0)});
    }
    gt_len = 0;
    for (std::size_t i = 0; i + 1 < gt.size(); ++i) gt_len += std::hypot(gt[i + 1].x - gt[i].x, gt[i + 1].y - gt[i].y);
  }

  double operator()(const std::vector<Point2>& p, double r) const {
    double sa = 0, st = 0;
    for (const Slot& s : slots) {
      const Point2 a = p[s.seg], b = p[s.seg + 1];
      const Point2 q{a.x + s.frac * (b.x - a.x), a.y + s.frac * (b.y - a.y)};
      double best = 1e300;
      std::size_t seg = 0;
      for (std::size_t i = 0; i + 1 < gt.size(); ++i) {
        const double d = oracle::seg_dist(q, gt[i], gt[i + 1]);
        if (d < best) best = d, seg = i;
      }
      sa += std::exp(-best * best / (2 * sigma * sigma));
      const double th = std::atan2(b.y - a.y, b.x - a.x);
      const double tg = std::atan2(gt[seg + 1].y - gt[seg].y, gt[seg + 1].x - gt[seg].x);
      const double sn = std::sin(th - tg);
      st += std::exp(-sn * sn / (2 * sigma_t * sigma_t));
    }
    const double m = static_cast<double>(slots.size());
    const double axis = 1 - alpha * sa / m - (1 - alpha) * st / m;
    auto l1 = [](Point2 u, Point2 v) { return std::abs(u.x - v.x) + std::abs(u.y - v.y); };
    const double ends = std::min(l1(p.front(), gt.front()) + l1(p.back(), gt.back()),
                                 l1(p.front(), gt.back()) + l1(p.back(), gt.front()));
    double dmin = 1e300;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) dmin = std::min(dmin, std::hypot(p[i + 1].x - p[i].x, p[i + 1].y - p[i].y));
    const double spread = std::max(0.0, gt_len / (2.0 * (n_points - 1)) - dmin);
    return std::abs(r - gt_r) + axis + ends + spread;
  }
};

double relative_error(const TubeGradient& g, const std::vector<double>& fd) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < g.d_points.size(); ++i) {
    num += std::pow(g.d_points[i].x - fd[2 * i], 2) + std::pow(g.d_points[i].y - fd[2 * i + 1], 2);
    den += fd[2 * i] * fd[2 * i] + fd[2 * i + 1] * fd[2 * i + 1];
  }
  num += std::pow(g.d_radius - fd.back(), 2);
  den += fd.back() * fd.back();
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

template <class F>
std::vector<double> central_differences(F&& f, std::vector<Point2> p, double r, double h) {
  std::vector<double> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (double Point2::*c : {&Point2::x, &Point2::y}) {
      const double v = p[i].*c;
      p[i].*c = v + h;
      const double up = f(p, r);
      p[i].*c = v - h;
      const double down = f(p, r);
      p[i].*c = v;
      out.push_back((up - down) / (2 * h));
    }
  }
  out.push_back((f(p, r + h) - f(p, r - h)) / (2 * h));
  return out;
}

}  // namespace

TEST(LossConfig, Validation) {
  LossConfig c;
  EXPECT_NO_THROW(c.validate());
  c.alpha = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.sigma_abs = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.n_samples = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.term_weights[2] = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(SAbs, Examples) {
  const PolyChain gt({{0, 0}, {10, 0}});
  EXPECT_DOUBLE_EQ(s_abs(gt, gt, 1.0, 100), 1.0);
  EXPECT_NEAR(s_abs(PolyChain({{0, 1}, {10, 1}}), gt, 1.0, 100), std::exp(-0.5), 1e-12);
  EXPECT_NEAR(s_abs(PolyChain({{3, 40}, {-20, 7}, {5, -9}}), gt, 1e6, 100), 1.0, 1e-9);
}

TEST(STan, Examples) {
  const PolyChain gt({{0, 0}, {10, 0}});
  EXPECT_DOUBLE_EQ(s_tan(gt, gt, 0.5, 100), 1.0);
  EXPECT_NEAR(s_tan(PolyChain({{5, -5}, {5, 5}}), gt, 0.5, 100), std::exp(-2.0), 1e-12);
  EXPECT_NEAR(s_tan(gt.reversed(), gt, 0.5, 100), 1.0, 1e-15);
}

TEST(LossAxis, Examples) {
  const PolyChain gt({{0, 0}, {10, 0}});
  const LossConfig cfg = with_sigma(1.0);
  EXPECT_NEAR(loss_axis(gt, gt, cfg, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(loss_axis(PolyChain({{0, 1}, {10, 1}}), gt, cfg, 1.0), 1 - 0.5 * std::exp(-0.5) - 0.5, 1e-12);
  EXPECT_NEAR(1 - 0.5 * std::exp(-0.5) - 0.5, 0.1967, 1e-4);
  LossConfig a0 = cfg;
  a0.alpha = 0.0;
  const PolyChain bent({{0, 1}, {4, 3}, {10, 0}});
  EXPECT_EQ(loss_axis(bent, gt, a0, 1.0), 1.0 - s_tan(bent, gt, 0.5, 100));
}

TEST(LossSpread, Examples) {
  const std::vector<Point2> uniform{{0, 0}, {2, 0}, {4, 0}, {6, 0}, {8, 0}};
  EXPECT_EQ(loss_spread(uniform, 8.0, 5), 0.0);
  const std::vector<Point2> coincident{{0, 0}, {2, 0}, {2, 0}, {6, 0}, {8, 0}};
  EXPECT_DOUBLE_EQ(loss_spread(coincident, 8.0, 5), 1.0);
  const std::vector<Point2> boundary{{0, 0}, {1, 0}, {4, 0}, {6, 0}, {8, 0}};
  EXPECT_EQ(loss_spread(boundary, 8.0, 5), 0.0);
  const std::vector<Point2> close{{0, 0}, {0.25, 0}, {4, 0}, {6, 0}, {8, 0}};
  EXPECT_DOUBLE_EQ(loss_spread(close, 8.0, 5), 0.75);
}

TEST(LossEndpoints, Examples) {
  const PolyChain gt({{0, 0}, {5, 1}, {10, 0}});
  EXPECT_EQ(loss_endpoints(gt, gt), 0.0);
  EXPECT_EQ(loss_endpoints(gt.reversed(), gt), 0.0);
  EXPECT_DOUBLE_EQ(loss_endpoints(PolyChain({{1, 0}, {10, 2}}), PolyChain({{0, 0}, {10, 0}})), 3.0);
  EXPECT_DOUBLE_EQ(loss_endpoints(PolyChain({{10, 2}, {1, 0}}), PolyChain({{0, 0}, {10, 0}})), 3.0);
}

TEST(LossRadius, Examples) {
  EXPECT_EQ(loss_radius(2, 2), 0.0);
  EXPECT_EQ(loss_radius(3, 2), 1.0);
  EXPECT_EQ(loss_radius(0.5, 2), 1.5);
}

TEST(LossTube, Examples) {
  const Tube gt = straight(0);
  const LossReport same = loss_tube(gt, gt, {});
  EXPECT_NEAR(same.total, 0.0, 1e-12);
  EXPECT_EQ(same.s_abs, 1.0);
  EXPECT_EQ(same.s_tan, 1.0);

  const LossReport wider = loss_tube(Tube(gt.axis(), 3.0), gt, {});
  EXPECT_NEAR(wider.total, 1.0, 1e-12);
  EXPECT_EQ(wider.radius_term, 1.0);

  const LossReport shifted = loss_tube(straight(1), gt, with_sigma(1.0));
  EXPECT_NEAR(shifted.axis_term, 1 - 0.5 * std::exp(-0.5) - 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(shifted.endpoints_term, 2.0);
  EXPECT_NEAR(shifted.total, shifted.axis_term + 2.0, 1e-12);

  EXPECT_THROW(loss_tube(Tube(PolyChain({{0, 0}, {5, 0}, {10, 0}}), 2), gt, {}), std::invalid_argument);
}

TEST(LossTube, TotalIsWeightedSum) {
  synthetic::Rng rng(61);
  LossConfig cfg;
  cfg.term_weights = {0.3, 2.0, 0.7, 1.5};
  for (int i = 0; i < 20; ++i) {
    const Tube gt = synthetic::random_tube(rng, 5);
    const Tube pred = synthetic::perturb_tube(rng, gt, 0.5, 0.3);
    const LossReport r = loss_tube(pred, gt, cfg);
    EXPECT_NEAR(r.total, 0.3 * r.radius_term + 2.0 * r.axis_term + 0.7 * r.endpoints_term + 1.5 * r.spread_term, 1e-12);
  }
}

TEST(GradLossTube, ZeroAtIdentity) {
  const Tube gt = straight(0);
  const TubeGradient g = grad_loss_tube(gt, gt, {});
  ASSERT_EQ(g.d_points.size(), 5u);
  for (const Point2& d : g.d_points) {
    EXPECT_NEAR(d.x, 0.0, 1e-9);
    EXPECT_NEAR(d.y, 0.0, 1e-9);
  }
  EXPECT_NEAR(g.d_radius, 0.0, 1e-9);
  // The identity is the minimum of several L1 terms; it is reported as such.
  EXPECT_FALSE(g.smooth);
}

TEST(GradLossTube, UniformOffsetDirectionalDerivative) {
  LossConfig cfg = with_sigma(1.0);
  cfg.term_weights = {0, 1, 0, 0};
  const TubeGradient g = grad_loss_tube(straight(1), straight(0), cfg);
  double along = 0;
  for (const Point2& d : g.d_points) along += d.y;
  const double want = 0.5 * std::exp(-0.5);
  EXPECT_NEAR(want, 0.3033, 1e-4);
  EXPECT_NEAR(along, want, 1e-9);
}

TEST(GradLossTube, MatchesIndependentFiniteDifferences) {
  synthetic::Rng rng(71);
  const LossConfig cfg;
  int checked = 0, drawn = 0;
  double worst = 0;
  while (checked < 100) {
    ASSERT_LT(++drawn, 400);
    const Tube gt = synthetic::random_tube(rng, 3 + rng.index(5));
    // Mostly near the ground truth, some far off it.
    const double noise = rng.uniform() < 0.7 ? 0.5 : 3.0;
    std::optional<Tube> drawn_pred;
    try {
      drawn_pred = synthetic::perturb_tube(rng, Tube(resample_uniform(gt.axis(), 5), gt.radius()), noise, 0.3);
    } catch (const GeometryError&) {
      continue;  // self-intersecting draw
    }
    const Tube& near = *drawn_pred;
    if (!grad_loss_tube(near, gt, cfg, 1e-4).smooth) continue;
    const FrozenOracle f(near.axis().points(), gt.axis().points(), gt.radius(), cfg);
    const TubeGradient g = grad_loss_tube(near, gt, cfg);
    const double err = relative_error(g, central_differences(f, near.axis().points(), near.radius(), 1e-5));
    worst = std::max(worst, err);
    EXPECT_LE(err, 1e-4) << "config " << checked;
    EXPECT_NEAR(f(near.axis().points(), near.radius()), loss_tube(near, gt, cfg).total, 1e-12);
    ++checked;
  }
  RecordProperty("max_relative_error", std::to_string(worst));
}

TEST(GradLossTube, SymmetricModeMatchesFrozenObjective) {
  synthetic::Rng rng(72);
  LossConfig cfg;
  cfg.symmetric = true;
  int checked = 0;
  for (int i = 0; i < 60 && checked < 30; ++i) {
    const Tube gt = synthetic::random_tube(rng, 5);
    const Tube pred = synthetic::perturb_tube(rng, gt, 0.5, 0.3);
    const FrozenTubeObjective obj(pred, gt, cfg);
    const TubeGradient g = obj.gradient(pred.axis().points(), pred.radius(), 1e-4);
    if (!g.smooth) continue;
    auto f = [&](const std::vector<Point2>& p, double r) { return obj.value(p, r); };
    EXPECT_LE(relative_error(g, central_differences(f, pred.axis().points(), pred.radius(), 1e-5)), 1e-4);
    ++checked;
  }
  EXPECT_GE(checked, 20);
}

TEST(GradLossTube, FlagsNonSmoothLoci) {
  const Tube gt = straight(0);
  auto has = [](const TubeGradient& g, const std::string& what) {
    return std::find(g.nonsmooth.begin(), g.nonsmooth.end(), what) != g.nonsmooth.end();
  };
  // Endpoints equidistant under both pairings.
  const Tube vertical(PolyChain({{5, -4}, {5, -2}, {5, 0}, {5, 2}, {5, 4}}), 3.0);
  EXPECT_TRUE(has(grad_loss_tube(vertical, gt, {}), "endpoint pairing tie"));
  // Two equally short segments below the spread threshold.
  const Tube clumped(PolyChain({{0, 1}, {0.5, 1}, {1, 1}, {5, 1}, {10, 1}}), 3.0);
  EXPECT_TRUE(has(grad_loss_tube(clumped, gt, {}), "shortest-segment tie"));
  // A sample equidistant from both arms of a V.
  const Tube v_gt(PolyChain({{0, 4}, {5, 0}, {10, 4}}), 2.0);
  const Tube probe(PolyChain({{5, 1}, {5, 3}, {5, 5}, {5, 7}, {5, 9}}), 3.0);
  EXPECT_TRUE(has(grad_loss_tube(probe, v_gt, {}), "closest-point tie on the ground-truth axis"));
  // Generic configuration.
  const Tube off(PolyChain({{0.3, 1.1}, {2.2, 0.7}, {5.1, 1.3}, {7.4, 0.9}, {9.6, 1.2}}), 2.5);
  EXPECT_TRUE(grad_loss_tube(off, gt, {}).smooth);
}

TEST(LossInvariants, IdentityAndBounds) {
  synthetic::Rng rng(81);
  for (int i = 0; i < 50; ++i) {
    const Tube gt = synthetic::random_tube(rng, 5);
    const LossReport self = loss_tube(gt, gt, {});
    EXPECT_NEAR(self.total, 0.0, 1e-9);
    const Tube pred = synthetic::perturb_tube(rng, gt, 2.0, 0.5);
    const LossReport r = loss_tube(pred, gt, {});
    EXPECT_GE(r.s_abs, 0.0);
    EXPECT_LE(r.s_abs, 1.0);
    EXPECT_GE(r.s_tan, 0.0);
    EXPECT_LE(r.s_tan, 1.0);
    EXPECT_GE(r.axis_term, 0.0);
    EXPECT_LE(r.axis_term, 1.0);
    EXPECT_GE(r.radius_term, 0.0);
    EXPECT_GE(r.endpoints_term, 0.0);
    EXPECT_GE(r.spread_term, 0.0);
  }
}

TEST(LossInvariants, ReparametrizationOfGroundTruth) {
  synthetic::Rng rng(82);
  const LossConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    const Tube gt = synthetic::random_tube(rng, 5);
    const Tube pred = synthetic::perturb_tube(rng, gt, 0.5, 0.0);
    std::vector<Point2> denser = gt.axis().points();
    for (int k = 0; k < 3; ++k) {
      const std::size_t seg = rng.index(denser.size() - 1);
      const double u = rng.uniform(0.2, 0.8);
      denser.insert(denser.begin() + static_cast<std::ptrdiff_t>(seg + 1), denser[seg] + u * (denser[seg + 1] - denser[seg]));
    }
    const double sigma = gt.radius();
    EXPECT_NEAR(loss_axis(pred.axis(), gt.axis(), cfg, sigma), loss_axis(pred.axis(), PolyChain(denser), cfg, sigma), 1e-3);
  }
}

TEST(LossInvariants, ReparametrizationOfPrediction) {
  // A straight prediction with extra collinear vertices spread above the
  // threshold describes the same curve.
  const PolyChain gt({{0, 0}, {4, 3}, {10, 2}, {16, 6}});
  const PolyChain a({{0, 1}, {16, 5}});
  const PolyChain b({{0, 1}, {4, 2}, {9, 3.25}, {16, 5}});
  const LossConfig cfg;
  EXPECT_NEAR(loss_axis(a, gt, cfg, 2.0), loss_axis(b, gt, cfg, 2.0), 1e-3);
  EXPECT_EQ(loss_endpoints(a, gt), loss_endpoints(b, gt));
}

TEST(LossInvariants, DirectionOfPrediction) {
  synthetic::Rng rng(83);
  const LossConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    const Tube gt = synthetic::random_tube(rng, 5);
    const Tube pred = synthetic::perturb_tube(rng, gt, 1.0, 0.3);
    EXPECT_NEAR(loss_axis(pred.axis(), gt.axis(), cfg, 3.0), loss_axis(pred.axis().reversed(), gt.axis(), cfg, 3.0), 1e-12);
    EXPECT_NEAR(loss_endpoints(pred.axis(), gt.axis()), loss_endpoints(pred.axis().reversed(), gt.axis()), 1e-12);
  }
}

TEST(LossInvariants, ScaleCovariance) {
  synthetic::Rng rng(84);
  for (int trial = 0; trial < 20; ++trial) {
    const Tube gt = synthetic::random_tube(rng, 5);
    const Tube pred = synthetic::perturb_tube(rng, gt, 1.0, 0.3);
    const double s = rng.uniform(0.3, 4.0);
    auto scaled = [s](const Tube& t) {
      std::vector<Point2> p;
      for (const Point2& q : t.axis().points()) p.push_back(s * q);
      return Tube(PolyChain(p), s * t.radius());
    };
    const LossReport r = loss_tube(pred, gt, {});
    const LossReport rs = loss_tube(scaled(pred), scaled(gt), {});
    EXPECT_NEAR(r.s_abs, rs.s_abs, 1e-9);
    EXPECT_NEAR(r.s_tan, rs.s_tan, 1e-9);
    EXPECT_NEAR(r.axis_term, rs.axis_term, 1e-9);
    EXPECT_NEAR(s * r.radius_term, rs.radius_term, 1e-9 * s);
    EXPECT_NEAR(s * r.endpoints_term, rs.endpoints_term, 1e-9 * s);
    EXPECT_NEAR(s * r.spread_term, rs.spread_term, 1e-9 * s);
  }
}

TEST(LossInvariants, MonotoneInOffset) {
  const PolyChain gt({{0, 0}, {3, 2}, {9, 1}});
  double prev = 2.0;
  for (double c = 0.0; c <= 3.0; c += 0.25) {
    const double v = s_abs(PolyChain({{0, c}, {3, 2 + c}, {9, 1 + c}}), gt, 1.0, 100);
    EXPECT_LT(v, prev) << "offset " << c;
    prev = v;
  }
}

TEST(FitTubeDescent, IdentityStopsImmediately) {
  const Tube gt = straight(0);
  const DescentResult r = fit_tube_descent(gt, gt, {}, 500, 1.0);
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_TRUE(r.trajectory.empty());
  EXPECT_NEAR(r.initial_loss, 0.0, 1e-12);
}

TEST(FitTubeDescent, RadiusOnly) {
  const Tube gt = straight(0, 2.0);
  const DescentResult r = fit_tube_descent(Tube(gt.axis(), 2.6), gt, {}, 500, 1.0);
  EXPECT_NEAR(r.tube.radius(), 2.0, 1e-3);
  EXPECT_NE(r.stop, DescentStop::max_iterations);
}

TEST(FitTubeDescent, NonIncreasingAndMostlySuccessful) {
  synthetic::Rng rng(1);
  int ok = 0;
  for (int i = 0; i < 20; ++i) {
    const Tube gt = synthetic::random_tube(rng, 5);
    const Tube init = synthetic::perturb_tube(rng, gt, 0.5, 0.3);
    const DescentResult r = fit_tube_descent(init, gt, {}, 500, 1.0);
    double prev = r.initial_loss;
    for (double v : r.trajectory) {
      EXPECT_LE(v, prev + 1e-12);
      prev = v;
    }
    EXPECT_LE(r.trajectory.size(), 500u);
    ok += polygon_iou(tube_envelope(r.tube, 8), tube_envelope(gt, 8)) >= 0.9;
  }
  EXPECT_GE(ok, 18);
}
