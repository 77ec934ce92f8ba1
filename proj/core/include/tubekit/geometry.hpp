#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tubekit {

/// Raised when a geometric value violates its construction invariants.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pixel-space point. Integer annotation coordinates are widened on load.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }
  constexpr Point2& operator+=(Point2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Point2& operator-=(Point2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr bool operator==(Point2, Point2) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

struct BoundingBox {
  Point2 min;
  Point2 max;

  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
};

BoundingBox bounding_box(std::span<const Point2> points);

/// Ordered polyline with at least two points, no repeated consecutive points,
/// and positive total length.
class PolyChain {
 public:
  explicit PolyChain(std::vector<Point2> points);

  const std::vector<Point2>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  std::size_t segment_count() const { return points_.size() - 1; }
  double length() const { return cumulative_.back(); }
  double segment_length(std::size_t i) const { return cumulative_[i + 1] - cumulative_[i]; }
  /// Arc length from the first point to vertex `i`.
  double arc_length_at(std::size_t i) const { return cumulative_[i]; }
  double segment_angle(std::size_t i) const;
  Point2 front() const { return points_.front(); }
  Point2 back() const { return points_.back(); }

  PolyChain reversed() const;

 private:
  std::vector<Point2> points_;
  std::vector<double> cumulative_;
};

/// Simple polygon with positive area, stored counter-clockwise.
///
/// Construction drops exact consecutive duplicates, rejects non-finite
/// coordinates, fewer than three distinct vertices, zero area, and any pair of
/// edges that touch other than at their shared vertex. Clockwise input is
/// reversed, which preserves the pairing (i, n-1-i) used by paired annotations.
class Polygon {
 public:
  explicit Polygon(std::vector<Point2> vertices);

  const std::vector<Point2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  double area() const { return area_; }
  double perimeter() const;
  BoundingBox bounds() const { return bounding_box(vertices_); }
  /// True if the caller's vertex order was reversed to make it counter-clockwise.
  bool was_reversed() const { return reversed_; }

 private:
  std::vector<Point2> vertices_;
  double area_ = 0.0;
  bool reversed_ = false;
};

/// Signed shoelace area; positive for counter-clockwise rings.
double signed_area(std::span<const Point2> ring);

/// Index pair of the first two edges found to intersect improperly, if any.
struct EdgeConflict {
  std::size_t first = 0;
  std::size_t second = 0;
};
bool find_self_intersection(std::span<const Point2> ring, EdgeConflict* conflict = nullptr);

/// True if the open polyline has two non-adjacent segments that touch, or two
/// adjacent segments that fold back onto each other.
bool polyline_self_intersects(std::span<const Point2> points);

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d);

/// Even-odd containment test; boundary points may land on either side.
bool contains(const Polygon& poly, Point2 p);

/// Euclidean distance from `p` to the polygon outline.
double distance_to_boundary(const Polygon& poly, Point2 p);

struct ChainSample {
  Point2 point;
  double tangent_angle = 0.0;  ///< radians, angle of the containing segment
  double t = 0.0;              ///< normalized arc length in [0, 1]
  std::size_t segment = 0;
  double fraction = 0.0;  ///< position within `segment`, in [0, 1]
};

/// `m` samples at t_j = j/(m-1). A sample landing exactly on an interior
/// vertex is assigned to the earlier segment with fraction 1.
std::vector<ChainSample> arc_length_sample(const PolyChain& chain, std::size_t m);

/// Chain with `n` points at uniform arc-length spacing.
PolyChain resample_uniform(const PolyChain& chain, std::size_t n);

/// Point at arc length `s` from the start (clamped to the chain).
Point2 point_at_arc_length(const PolyChain& chain, double s);

struct ChainProjection {
  double distance = 0.0;
  Point2 foot;
  double tangent_angle = 0.0;
  std::size_t segment = 0;
  double fraction = 0.0;  ///< clamped foot parameter on `segment`
};

/// Closest point on the chain. Equal distances resolve to the lowest segment
/// index.
ChainProjection project_to_chain(Point2 p, const PolyChain& chain);

/// Same query over a raw vertex list (no validity checks; zero-length
/// segments project to their start point).
ChainProjection project_to_points(Point2 p, std::span<const Point2> points);

/// Symmetric Hausdorff distance between two chains, sampled every `spacing`
/// pixels along each chain and measured exactly against the other.
double hausdorff_distance(const PolyChain& a, const PolyChain& b, double spacing);

double intersection_area(const Polygon& a, const Polygon& b);

/// Exact intersection-over-union by polygon clipping.
double polygon_iou(const Polygon& a, const Polygon& b);

/// IoU counted over the centers of a grid x grid lattice spanning the joint
/// bounding box. Used to cross-check polygon_iou.
double rasterize_iou(const Polygon& a, const Polygon& b, std::size_t grid);

}  // namespace tubekit
