#include "tubekit/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

// Exact double arithmetic instead of the integer rescaling Boost applies by
// default; rescaling costs about 1e-8 relative area.
#define BOOST_GEOMETRY_NO_ROBUSTNESS
#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

namespace tubekit {
namespace {

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint, /*ClockWise=*/false, /*Closed=*/true>;
using BgMultiPolygon = bg::model::multi_polygon<BgPolygon>;

BgPolygon to_boost(const Polygon& poly) {
  BgPolygon out;
  auto& ring = out.outer();
  ring.reserve(poly.size() + 1);
  for (const Point2& p : poly.vertices()) ring.emplace_back(p.x, p.y);
  ring.emplace_back(poly.vertices().front().x, poly.vertices().front().y);
  return out;
}

int orientation(Point2 a, Point2 b, Point2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

// c is collinear with [a, b]; is it within the segment's extent?
bool on_segment(Point2 a, Point2 b, Point2 c) {
  return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
}

struct SegmentFoot {
  Point2 foot;
  double fraction = 0.0;
  double distance = 0.0;
};

SegmentFoot closest_on_segment(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  double u = 0.0;
  if (len2 > 0.0) u = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  // Clamped feet are the exact endpoints so that neighbouring segments sharing
  // a vertex report bit-identical distances there.
  const Point2 foot = u == 0.0 ? a : (u == 1.0 ? b : a + u * ab);
  return {foot, u, distance(p, foot)};
}

// Adjacent edges (a->v, v->b) fold back if they are collinear and point the
// same way out of the shared vertex.
bool folds_back(Point2 a, Point2 v, Point2 b) {
  const Point2 da = a - v;
  const Point2 db = b - v;
  return cross(da, db) == 0.0 && dot(da, db) > 0.0;
}

struct SweepEdge {
  double xmin;
  double xmax;
  std::size_t index;
};

}  // namespace

BoundingBox bounding_box(std::span<const Point2> points) {
  BoundingBox box{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
                  {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (const Point2& p : points) {
    box.min.x = std::min(box.min.x, p.x);
    box.min.y = std::min(box.min.y, p.y);
    box.max.x = std::max(box.max.x, p.x);
    box.max.y = std::max(box.max.y, p.y);
  }
  return box;
}

// ---------------------------------------------------------------------------
// PolyChain

PolyChain::PolyChain(std::vector<Point2> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw GeometryError("PolyChain needs at least 2 points");
  cumulative_.resize(points_.size());
  cumulative_[0] = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!is_finite(points_[i])) {
      throw GeometryError("PolyChain point " + std::to_string(i) + " is not finite");
    }
    if (i == 0) continue;
    if (points_[i] == points_[i - 1]) {
      throw GeometryError("PolyChain points " + std::to_string(i - 1) + " and " + std::to_string(i) +
                          " coincide");
    }
    cumulative_[i] = cumulative_[i - 1] + distance(points_[i - 1], points_[i]);
  }
  if (!(cumulative_.back() > 0.0)) throw GeometryError("PolyChain has zero length");
}

double PolyChain::segment_angle(std::size_t i) const {
  const Point2 d = points_[i + 1] - points_[i];
  return std::atan2(d.y, d.x);
}

PolyChain PolyChain::reversed() const {
  std::vector<Point2> pts(points_.rbegin(), points_.rend());
  return PolyChain(std::move(pts));
}

// ---------------------------------------------------------------------------
// Polygon

double signed_area(std::span<const Point2> ring) {
  double twice = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross(ring[i], ring[(i + 1) % n]);
  }
  return 0.5 * twice;
}

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

bool find_self_intersection(std::span<const Point2> ring, EdgeConflict* conflict) {
  const std::size_t n = ring.size();
  if (n < 3) return false;

  // Sweep-and-prune on x extents: only edges whose x ranges overlap are tested.
  std::vector<SweepEdge> edges(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = ring[i];
    const Point2 b = ring[(i + 1) % n];
    edges[i] = {std::min(a.x, b.x), std::max(a.x, b.x), i};
  }
  std::sort(edges.begin(), edges.end(),
            [](const SweepEdge& l, const SweepEdge& r) { return l.xmin < r.xmin || (l.xmin == r.xmin && l.index < r.index); });

  auto report = [&](std::size_t i, std::size_t j) {
    if (conflict) *conflict = {std::min(i, j), std::max(i, j)};
    return true;
  };

  for (std::size_t s = 0; s < n; ++s) {
    const SweepEdge& e = edges[s];
    for (std::size_t t = s + 1; t < n && edges[t].xmin <= e.xmax; ++t) {
      std::size_t i = e.index;
      std::size_t j = edges[t].index;
      if (i > j) std::swap(i, j);
      const Point2 a = ring[i];
      const Point2 b = ring[(i + 1) % n];
      const Point2 c = ring[j];
      const Point2 d = ring[(j + 1) % n];
      if (j == i + 1) {
        if (folds_back(a, b, d)) return report(i, j);
        if (n == 3) continue;
        // Adjacent edges share b; any other contact is a conflict.
        if (orientation(a, b, d) == 0 && on_segment(a, b, d)) return report(i, j);
        if (orientation(c, d, a) == 0 && on_segment(c, d, a)) return report(i, j);
        continue;
      }
      if (i == 0 && j == n - 1) {
        if (folds_back(b, a, c)) return report(i, j);
        if (n == 3) continue;
        if (orientation(a, b, c) == 0 && on_segment(a, b, c)) return report(i, j);
        if (orientation(c, d, b) == 0 && on_segment(c, d, b)) return report(i, j);
        continue;
      }
      if (segments_intersect(a, b, c, d)) return report(i, j);
    }
  }
  return false;
}

bool polyline_self_intersects(std::span<const Point2> pts) {
  const std::size_t segs = pts.size() < 2 ? 0 : pts.size() - 1;
  for (std::size_t i = 0; i < segs; ++i) {
    for (std::size_t j = i + 1; j < segs; ++j) {
      if (j == i + 1) {
        if (folds_back(pts[i], pts[i + 1], pts[j + 1])) return true;
        continue;
      }
      if (segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1])) return true;
    }
  }
  return false;
}

Polygon::Polygon(std::vector<Point2> vertices) {
  vertices_.reserve(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!is_finite(vertices[i])) {
      throw GeometryError("polygon vertex " + std::to_string(i) + " is not finite");
    }
    if (!vertices_.empty() && vertices_.back() == vertices[i]) continue;
    vertices_.push_back(vertices[i]);
  }
  while (vertices_.size() > 1 && vertices_.front() == vertices_.back()) vertices_.pop_back();
  if (vertices_.size() < 3) {
    throw GeometryError("polygon needs at least 3 distinct vertices, got " + std::to_string(vertices_.size()));
  }

  EdgeConflict conflict;
  if (find_self_intersection(vertices_, &conflict)) {
    std::ostringstream msg;
    msg << "polygon is not simple: edge " << conflict.first << " intersects edge " << conflict.second;
    throw GeometryError(msg.str());
  }

  const double a = signed_area(vertices_);
  if (!(std::abs(a) > 0.0)) throw GeometryError("polygon has zero area");
  if (a < 0.0) {
    std::reverse(vertices_.begin(), vertices_.end());
    reversed_ = true;
  }
  area_ = std::abs(a);
}

double Polygon::perimeter() const {
  double total = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    total += distance(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
  }
  return total;
}

bool contains(const Polygon& poly, Point2 p) {
  const auto& v = poly.vertices();
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double x = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

double distance_to_boundary(const Polygon& poly, Point2 p) {
  const auto& v = poly.vertices();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    best = std::min(best, closest_on_segment(p, v[i], v[(i + 1) % v.size()]).distance);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Chains

std::vector<ChainSample> arc_length_sample(const PolyChain& chain, std::size_t m) {
  if (m < 2) throw std::invalid_argument("arc_length_sample needs m >= 2");
  const auto& pts = chain.points();
  const double total = chain.length();
  const std::size_t last_segment = chain.segment_count() - 1;

  std::vector<ChainSample> out;
  out.reserve(m);
  std::size_t seg = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(m - 1);
    const double s = (j + 1 == m) ? total : t * total;
    while (seg < last_segment && chain.arc_length_at(seg + 1) < s) ++seg;
    const double len = chain.segment_length(seg);
    const double u = std::clamp((s - chain.arc_length_at(seg)) / len, 0.0, 1.0);
    const Point2 a = pts[seg];
    const Point2 b = pts[seg + 1];
    out.push_back({(1.0 - u) * a + u * b, chain.segment_angle(seg), t, seg, u});
  }
  return out;
}

PolyChain resample_uniform(const PolyChain& chain, std::size_t n) {
  std::vector<Point2> pts;
  pts.reserve(n);
  for (const ChainSample& s : arc_length_sample(chain, n)) pts.push_back(s.point);
  return PolyChain(std::move(pts));
}

Point2 point_at_arc_length(const PolyChain& chain, double s) {
  s = std::clamp(s, 0.0, chain.length());
  std::size_t seg = 0;
  while (seg + 1 < chain.segment_count() && chain.arc_length_at(seg + 1) < s) ++seg;
  const double u = std::clamp((s - chain.arc_length_at(seg)) / chain.segment_length(seg), 0.0, 1.0);
  const auto& pts = chain.points();
  return (1.0 - u) * pts[seg] + u * pts[seg + 1];
}

ChainProjection project_to_points(Point2 p, std::span<const Point2> points) {
  ChainProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const SegmentFoot f = closest_on_segment(p, points[i], points[i + 1]);
    if (f.distance < best.distance) {
      const Point2 d = points[i + 1] - points[i];
      best = {f.distance, f.foot, std::atan2(d.y, d.x), i, f.fraction};
    }
  }
  return best;
}

ChainProjection project_to_chain(Point2 p, const PolyChain& chain) {
  return project_to_points(p, chain.points());
}

double hausdorff_distance(const PolyChain& a, const PolyChain& b, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("hausdorff_distance needs positive spacing");
  auto directed = [spacing](const PolyChain& from, const PolyChain& to) {
    const auto m = static_cast<std::size_t>(std::ceil(from.length() / spacing)) + 1;
    double worst = 0.0;
    for (const ChainSample& s : arc_length_sample(from, std::max<std::size_t>(m, 2))) {
      worst = std::max(worst, project_to_chain(s.point, to).distance);
    }
    // Vertices are where the directed distance can peak between samples.
    for (const Point2& p : from.points()) worst = std::max(worst, project_to_chain(p, to).distance);
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

// ---------------------------------------------------------------------------
// Areas

double intersection_area(const Polygon& a, const Polygon& b) {
  const BoundingBox ba = a.bounds();
  const BoundingBox bb = b.bounds();
  if (ba.max.x < bb.min.x || bb.max.x < ba.min.x || ba.max.y < bb.min.y || bb.max.y < ba.min.y) {
    return 0.0;
  }
  BgMultiPolygon out;
  try {
    bg::intersection(to_boost(a), to_boost(b), out);
  } catch (const bg::exception& e) {
    throw GeometryError(std::string("polygon intersection failed: ") + e.what());
  }
  return std::max(0.0, bg::area(out));
}

namespace {

bool same_ring(const Polygon& a, const Polygon& b) {
  const auto& va = a.vertices();
  const auto& vb = b.vertices();
  if (va.size() != vb.size()) return false;
  const auto start = std::find(vb.begin(), vb.end(), va.front());
  if (start == vb.end()) return false;
  const std::size_t offset = static_cast<std::size_t>(start - vb.begin());
  for (std::size_t i = 0; i < va.size(); ++i) {
    if (!(va[i] == vb[(i + offset) % vb.size()])) return false;
  }
  return true;
}

}  // namespace

double polygon_iou(const Polygon& a, const Polygon& b) {
  if (same_ring(a, b)) return 1.0;
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

namespace {

// Half-open runs [first, last) of lattice columns whose centers lie inside the
// polygon on the row at height y (even-odd rule).
void row_runs(const Polygon& poly, double y, double x0, double step, std::size_t grid,
              std::vector<double>& xs, std::vector<std::pair<std::size_t, std::size_t>>& runs) {
  xs.clear();
  runs.clear();
  const auto& v = poly.vertices();
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > y) != (v[j].y > y)) {
      xs.push_back(v[j].x + (y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y));
    }
  }
  std::sort(xs.begin(), xs.end());
  for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
    // Column c has center x0 + (c + 0.5) step; inside iff xs[k] < center < xs[k+1]
    // to match the strict comparison of the crossing test.
    const double lo = (xs[k] - x0) / step - 0.5;
    const double hi = (xs[k + 1] - x0) / step - 0.5;
    auto first = static_cast<long long>(std::floor(lo)) + 1;
    auto last = static_cast<long long>(std::ceil(hi));
    first = std::max<long long>(first, 0);
    last = std::min<long long>(last, static_cast<long long>(grid));
    if (first < last) runs.emplace_back(static_cast<std::size_t>(first), static_cast<std::size_t>(last));
  }
}

}  // namespace

double rasterize_iou(const Polygon& a, const Polygon& b, std::size_t grid) {
  if (grid < 64) throw std::invalid_argument("rasterize_iou needs grid >= 64");
  const BoundingBox ba = a.bounds();
  const BoundingBox bb = b.bounds();
  const Point2 lo{std::min(ba.min.x, bb.min.x), std::min(ba.min.y, bb.min.y)};
  const Point2 hi{std::max(ba.max.x, bb.max.x), std::max(ba.max.y, bb.max.y)};
  const double sx = (hi.x - lo.x) / static_cast<double>(grid);
  const double sy = (hi.y - lo.y) / static_cast<double>(grid);

  std::vector<double> xs;
  std::vector<std::pair<std::size_t, std::size_t>> runs_a;
  std::vector<std::pair<std::size_t, std::size_t>> runs_b;
  std::size_t count_a = 0;
  std::size_t count_b = 0;
  std::size_t count_both = 0;
  for (std::size_t r = 0; r < grid; ++r) {
    const double y = lo.y + (static_cast<double>(r) + 0.5) * sy;
    row_runs(a, y, lo.x, sx, grid, xs, runs_a);
    row_runs(b, y, lo.x, sx, grid, xs, runs_b);
    for (const auto& [f, l] : runs_a) count_a += l - f;
    for (const auto& [f, l] : runs_b) count_b += l - f;
    for (const auto& [fa, la] : runs_a) {
      for (const auto& [fb, lb] : runs_b) {
        const std::size_t f = std::max(fa, fb);
        const std::size_t l = std::min(la, lb);
        if (f < l) count_both += l - f;
      }
    }
  }
  const std::size_t uni = count_a + count_b - count_both;
  if (uni == 0) return 0.0;
  return static_cast<double>(count_both) / static_cast<double>(uni);
}

}  // namespace tubekit
