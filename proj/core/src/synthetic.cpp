#include "tubekit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tubekit::synthetic {
namespace {

Point2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

std::vector<Point2> vertex_normals(std::span<const Point2> c) {
  const std::size_t n = c.size();
  std::vector<Point2> normals(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 prev = c[i == 0 ? 0 : i - 1];
    const Point2 next = c[i + 1 == n ? n - 1 : i + 1];
    const Point2 d = (next - prev) / norm(next - prev);
    normals[i] = {-d.y, d.x};
  }
  return normals;
}

}  // namespace

Point2 Rng::in_disk(double r) {
  const double rho = r * std::sqrt(uniform());
  const double theta = uniform(0.0, 2.0 * std::numbers::pi);
  return rho * unit(theta);
}

Polygon band_polygon(std::span<const Point2> centerline, std::span<const double> half_widths) {
  if (centerline.size() < 2 || centerline.size() != half_widths.size()) {
    throw std::invalid_argument("band_polygon needs >= 2 centerline points with matching half-widths");
  }
  const std::vector<Point2> normals = vertex_normals(centerline);
  std::vector<Point2> ring;
  ring.reserve(2 * centerline.size());
  for (std::size_t i = 0; i < centerline.size(); ++i) ring.push_back(centerline[i] + half_widths[i] * normals[i]);
  for (std::size_t i = centerline.size(); i-- > 0;) ring.push_back(centerline[i] - half_widths[i] * normals[i]);
  return Polygon(std::move(ring));
}

Polygon sine_band(double amplitude, double wavelength_scale, double x0, double x1, double half_width,
                  std::size_t samples) {
  std::vector<Point2> c;
  c.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(samples - 1);
    c.push_back({x, amplitude * std::sin(x / wavelength_scale)});
  }
  const std::vector<double> w(samples, half_width);
  return band_polygon(c, w);
}

std::vector<Point2> arc_centerline(Point2 origin, double heading, double sweep, double length, std::size_t n) {
  std::vector<Point2> out;
  out.reserve(n);
  const double curvature = sweep / length;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = length * static_cast<double>(i) / static_cast<double>(n - 1);
    if (std::abs(curvature) < 1e-12) {
      out.push_back(origin + s * unit(heading));
      continue;
    }
    const double r = 1.0 / curvature;
    const double a = heading + s * curvature;
    const Point2 center = origin + r * Point2{-std::sin(heading), std::cos(heading)};
    out.push_back(center + r * Point2{std::sin(a), -std::cos(a)});
  }
  return out;
}

Polygon rectangle(Point2 center, double width, double height, double angle) {
  const Point2 u = unit(angle);
  const Point2 v{-u.y, u.x};
  const double hw = 0.5 * width;
  const double hh = 0.5 * height;
  return Polygon({center - hw * u - hh * v, center + hw * u - hh * v, center + hw * u + hh * v,
                  center - hw * u + hh * v});
}

Polygon random_star_polygon(Rng& rng, Point2 center, double mean_radius, std::size_t n) {
  std::vector<double> angles(n);
  for (std::size_t i = 0; i < n; ++i) {
    angles[i] = 2.0 * std::numbers::pi * (static_cast<double>(i) + rng.uniform(0.1, 0.9)) / static_cast<double>(n);
  }
  std::vector<Point2> ring;
  ring.reserve(n);
  for (double a : angles) ring.push_back(center + mean_radius * rng.uniform(0.4, 1.3) * unit(a));
  return Polygon(std::move(ring));
}

BandSpec random_band(Rng& rng, double max_variation, std::size_t samples) {
  BandSpec spec;
  spec.base_half_width = rng.uniform(6.0, 12.0);
  const double length = spec.base_half_width * rng.uniform(30.0, 60.0);
  const double sweep = rng.uniform(-0.25, 0.25);
  const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  spec.centerline = arc_centerline({rng.uniform(-50, 50), rng.uniform(-50, 50)}, heading, sweep, length, samples);
  // Peak-to-peak variation v around the mean: w = w0 (1 + v/2 sin(...)).
  const double variation = rng.uniform(0.0, max_variation);
  const double cycles = rng.uniform(0.5, 2.0);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  spec.half_widths.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(samples - 1);
    spec.half_widths[i] =
        spec.base_half_width * (1.0 + 0.5 * variation * std::sin(2.0 * std::numbers::pi * cycles * s + phase));
  }
  return spec;
}

std::vector<Point2> random_axis(Rng& rng, Point2 origin, double length, double max_turn, std::size_t n) {
  std::vector<Point2> pts{origin};
  double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double step = length / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    if (i > 1) heading += rng.uniform(-max_turn, max_turn);
    pts.push_back(pts.back() + step * unit(heading));
  }
  return pts;
}

Tube random_tube(Rng& rng, std::size_t n_points) {
  const double length = rng.uniform(80.0, 160.0);
  const double radius = rng.uniform(6.0, 14.0);
  const Point2 origin{rng.uniform(0.0, 200.0), rng.uniform(0.0, 200.0)};
  return Tube(PolyChain(random_axis(rng, origin, length, 0.35, n_points)), radius);
}

Tube perturb_tube(Rng& rng, const Tube& gt, double vertex_noise, double radius_jitter) {
  std::vector<Point2> pts = gt.axis().points();
  for (Point2& p : pts) p += rng.in_disk(vertex_noise * gt.radius());
  const double r = gt.radius() * rng.uniform(1.0 - radius_jitter, 1.0 + radius_jitter);
  return Tube(PolyChain(std::move(pts)), r);
}

}  // namespace tubekit::synthetic
