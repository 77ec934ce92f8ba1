#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "tubekit/geometry.hpp"
#include "tubekit/tube.hpp"

namespace tubekit::synthetic {

/// Seeded generator whose draws are identical on every platform
/// (the standard distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  /// Point uniform in the disk of radius r.
  Point2 in_disk(double r);

 private:
  std::mt19937_64 engine_;
};

/// Band of the given half-widths around a centerline, built from offsets
/// along the vertex normals, with flat ends. Vertex order: left side forward,
/// then right side backward, so vertex i pairs with vertex 2k-1-i.
Polygon band_polygon(std::span<const Point2> centerline, std::span<const double> half_widths);

/// Band of constant half-width around y = amplitude * sin(x / wavelength_scale)
/// for x in [x0, x1], sampled at `samples` centerline points.
Polygon sine_band(double amplitude, double wavelength_scale, double x0, double x1, double half_width,
                  std::size_t samples = 61);

/// `n` points on a circular arc of the given length that turns by `sweep`
/// radians, starting at `origin` heading along `heading`.
std::vector<Point2> arc_centerline(Point2 origin, double heading, double sweep, double length, std::size_t n);

/// Rectangle with the given size, rotation, and center.
Polygon rectangle(Point2 center, double width, double height, double angle);

/// Star-shaped simple polygon with `n` vertices around `center`.
Polygon random_star_polygon(Rng& rng, Point2 center, double mean_radius, std::size_t n);

struct BandSpec {
  std::vector<Point2> centerline;
  std::vector<double> half_widths;
  double base_half_width = 0.0;
};

/// Text-line-like band: length 30-60 half-widths, bending by at most 0.25 rad,
/// half-width varying sinusoidally by at most `max_variation` peak-to-peak
/// relative to its mean.
BandSpec random_band(Rng& rng, double max_variation, std::size_t samples = 41);

/// Smooth random axis: `n` points at uniform arc-length spacing along a
/// bending curve of the given length; adjacent segment turns stay below
/// `max_turn` radians.
std::vector<Point2> random_axis(Rng& rng, Point2 origin, double length, double max_turn, std::size_t n);

/// Ground-truth tube drawn from a desk-scale distribution: length 80-160 px,
/// radius 6-14 px, gentle bends.
Tube random_tube(Rng& rng, std::size_t n_points);

/// Copy of `gt` with every axis vertex displaced by up to
/// `vertex_noise * radius` and the radius scaled into [1 - jitter, 1 + jitter].
Tube perturb_tube(Rng& rng, const Tube& gt, double vertex_noise, double radius_jitter);

}  // namespace tubekit::synthetic
