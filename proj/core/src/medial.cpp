#include "tubekit/medial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <sstream>
#include <vector>

#include <boost/polygon/voronoi.hpp>

namespace tubekit {
namespace {

using IPoint = boost::polygon::point_data<int>;

// Upper bound on outline samples; spacing grows to respect it.
constexpr std::size_t kMaxBoundarySamples = 40000;

struct SkeletonGraph {
  std::vector<Point2> nodes;
  std::vector<double> clearance;
  std::vector<std::vector<std::size_t>> adjacency;
};

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::vector<Point2> resample_outline(const Polygon& poly, double spacing) {
  const auto& v = poly.vertices();
  std::vector<Point2> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 a = v[i];
    const Point2 b = v[(i + 1) % v.size()];
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(distance(a, b) / spacing)));
    for (std::size_t j = 0; j < k; ++j) {
      out.push_back(a + (static_cast<double>(j) / static_cast<double>(k)) * (b - a));
    }
  }
  return out;
}

bool segment_inside(const Polygon& poly, Point2 a, double ca, Point2 b, double cb) {
  // Disks of clearance radius around both ends are inside the polygon; if they
  // cover the segment there is nothing to check.
  if (distance(a, b) <= ca + cb) return true;
  const auto& v = poly.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (segments_intersect(a, b, v[i], v[(i + 1) % v.size()])) return false;
  }
  return true;
}

// Interior part of the Voronoi diagram of outline samples, reduced to a tree.
SkeletonGraph build_skeleton(const Polygon& poly, double spacing) {
  const std::vector<Point2> samples = resample_outline(poly, spacing);
  const BoundingBox box = poly.bounds();
  const double extent = std::max(box.width(), box.height());
  // Integer lattice for the Voronoi builder; ~2^-26 of the extent per unit.
  const double scale = static_cast<double>(1LL << 26) / extent;

  std::vector<IPoint> sites;
  sites.reserve(samples.size());
  for (const Point2& p : samples) {
    sites.emplace_back(static_cast<int>(std::llround((p.x - box.min.x) * scale)),
                       static_cast<int>(std::llround((p.y - box.min.y) * scale)));
  }
  std::sort(sites.begin(), sites.end(), [](const IPoint& a, const IPoint& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());

  boost::polygon::voronoi_diagram<double> vd;
  boost::polygon::construct_voronoi(sites.begin(), sites.end(), &vd);

  const auto& vertices = vd.vertices();
  const std::size_t nv = vertices.size();
  std::vector<Point2> pos(nv);
  std::vector<double> clear(nv, 0.0);
  std::vector<char> keep(nv, 0);
  for (std::size_t i = 0; i < nv; ++i) {
    pos[i] = {vertices[i].x() / scale + box.min.x, vertices[i].y() / scale + box.min.y};
    if (contains(poly, pos[i])) {
      clear[i] = distance_to_boundary(poly, pos[i]);
      keep[i] = clear[i] > 0.0;
    }
  }

  auto index_of = [&](const boost::polygon::voronoi_vertex<double>* v) {
    return static_cast<std::size_t>(v - &vertices[0]);
  };

  struct Edge {
    double length;
    std::size_t a;
    std::size_t b;
  };
  std::vector<Edge> edges;
  DisjointSets merge(nv);
  const double merge_tol = 1e-9 * extent;
  for (const auto& e : vd.edges()) {
    if (!e.is_finite() || !e.is_primary()) continue;
    if (&e > e.twin()) continue;
    const std::size_t a = index_of(e.vertex0());
    const std::size_t b = index_of(e.vertex1());
    if (!keep[a] || !keep[b]) continue;
    const double len = distance(pos[a], pos[b]);
    if (len <= merge_tol) {
      merge.unite(a, b);
      continue;
    }
    if (!segment_inside(poly, pos[a], clear[a], pos[b], clear[b])) continue;
    edges.push_back({len, a, b});
  }

  // Compact the surviving vertices, then keep a minimum spanning forest so
  // near-degenerate cocircular sites cannot leave cycles behind.
  std::vector<std::size_t> compact(nv, std::numeric_limits<std::size_t>::max());
  SkeletonGraph g;
  auto node_of = [&](std::size_t v) {
    const std::size_t root = merge.find(v);
    if (compact[root] == std::numeric_limits<std::size_t>::max()) {
      compact[root] = g.nodes.size();
      g.nodes.push_back(pos[root]);
      g.clearance.push_back(clear[root]);
      g.adjacency.emplace_back();
    }
    return compact[root];
  };
  std::vector<Edge> compacted;
  compacted.reserve(edges.size());
  for (const Edge& e : edges) {
    const std::size_t a = node_of(e.a);
    const std::size_t b = node_of(e.b);
    if (a != b) compacted.push_back({e.length, a, b});
  }
  std::sort(compacted.begin(), compacted.end(), [](const Edge& l, const Edge& r) {
    return l.length < r.length || (l.length == r.length && (l.a < r.a || (l.a == r.a && l.b < r.b)));
  });
  DisjointSets forest(g.nodes.size());
  for (const Edge& e : compacted) {
    if (forest.unite(e.a, e.b)) {
      g.adjacency[e.a].push_back(e.b);
      g.adjacency[e.b].push_back(e.a);
    }
  }
  return g;
}

std::vector<std::size_t> component_of(const SkeletonGraph& g, std::size_t seed) {
  std::vector<char> seen(g.nodes.size(), 0);
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{seed};
  seen[seed] = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    out.push_back(u);
    for (std::size_t w : g.adjacency[u]) {
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return out;
}

// Removes leaf branches (leaf up to, excluding, the next junction) whose leaf
// clearance is below the threshold. Branches are found against the degrees at
// the start of each round and removed together, so a spur cannot run through
// a junction emptied by its sibling. A junction keeps at least one branch, or
// its two longest if every branch qualifies; a bare path is never trimmed.
void prune_branches(SkeletonGraph& g, std::vector<char>& alive, double threshold) {
  auto degree = [&](std::size_t u) {
    std::size_t d = 0;
    for (std::size_t w : g.adjacency[u]) d += alive[w];
    return d;
  };
  struct Branch {
    std::size_t junction;
    double length;
    std::vector<std::size_t> nodes;
  };
  for (;;) {
    std::vector<Branch> branches;
    for (std::size_t leaf = 0; leaf < g.nodes.size(); ++leaf) {
      if (!alive[leaf] || degree(leaf) != 1 || !(g.clearance[leaf] < threshold)) continue;
      Branch b{0, 0.0, {leaf}};
      std::size_t prev = leaf;
      std::size_t cur = leaf;
      for (std::size_t w : g.adjacency[leaf]) {
        if (alive[w]) cur = w;
      }
      b.length += distance(g.nodes[prev], g.nodes[cur]);
      while (degree(cur) == 2) {
        b.nodes.push_back(cur);
        std::size_t next = cur;
        for (std::size_t w : g.adjacency[cur]) {
          if (alive[w] && w != prev) next = w;
        }
        prev = cur;
        cur = next;
        b.length += distance(g.nodes[prev], g.nodes[cur]);
      }
      if (degree(cur) < 3) continue;
      b.junction = cur;
      branches.push_back(std::move(b));
    }
    if (branches.empty()) return;

    std::sort(branches.begin(), branches.end(), [](const Branch& l, const Branch& r) {
      return l.junction < r.junction || (l.junction == r.junction && l.length > r.length);
    });
    for (std::size_t i = 0; i < branches.size();) {
      std::size_t j = i;
      while (j < branches.size() && branches[j].junction == branches[i].junction) ++j;
      const std::size_t count = j - i;
      const std::size_t deg = degree(branches[i].junction);
      // Longest-first within a junction; spare the longest ones if needed.
      std::size_t spare = 0;
      if (count == deg) spare = 2;
      for (std::size_t k = i + spare; k < j; ++k) {
        for (std::size_t u : branches[k].nodes) alive[u] = 0;
      }
      i = j;
    }
  }
}

// Farthest alive node from `from` along tree edges, with parent links.
std::size_t farthest(const SkeletonGraph& g, const std::vector<char>& alive, std::size_t from,
                     std::vector<std::size_t>& parent) {
  std::vector<double> dist(g.nodes.size(), -1.0);
  parent.assign(g.nodes.size(), std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> stack{from};
  dist[from] = 0.0;
  std::size_t best = from;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    if (dist[u] > dist[best] || (dist[u] == dist[best] && u < best)) best = u;
    for (std::size_t w : g.adjacency[u]) {
      if (alive[w] && dist[w] < 0.0) {
        dist[w] = dist[u] + distance(g.nodes[u], g.nodes[w]);
        parent[w] = u;
        stack.push_back(w);
      }
    }
  }
  return best;
}

// Nearest crossing of the ray origin + t*dir (t > 0) with the outline.
std::optional<Point2> cast_to_outline(const Polygon& poly, Point2 origin, Point2 dir) {
  const auto& v = poly.vertices();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 a = v[i];
    const Point2 e = v[(i + 1) % v.size()] - a;
    const double denom = cross(dir, e);
    if (denom == 0.0) continue;
    const Point2 ao = a - origin;
    const double t = cross(ao, e) / denom;
    const double u = cross(ao, dir) / denom;
    if (t > 0.0 && u >= 0.0 && u <= 1.0) best = std::min(best, t);
  }
  if (!std::isfinite(best)) return std::nullopt;
  return origin + best * dir;
}

std::vector<Point2> dedupe(std::vector<Point2> pts, double tol) {
  std::vector<Point2> out;
  out.reserve(pts.size());
  for (const Point2& p : pts) {
    if (out.empty() || distance(out.back(), p) > tol) out.push_back(p);
  }
  return out;
}

PolyChain extend_to_outline(const Polygon& poly, const PolyChain& pruned, double spacing) {
  std::vector<Point2> pts = pruned.points();
  const double len = pruned.length();
  // Direction of each end taken over a window about one local clearance long.
  auto end_direction = [&](bool at_front) {
    const Point2 end = at_front ? pruned.front() : pruned.back();
    const double window =
        std::min(0.5 * len, std::max(distance_to_boundary(poly, end), 2.0 * spacing));
    const Point2 inner = point_at_arc_length(pruned, at_front ? window : len - window);
    const Point2 d = end - inner;
    return d / norm(d);
  };
  if (auto hit = cast_to_outline(poly, pruned.front(), end_direction(true))) {
    pts.insert(pts.begin(), *hit);
  }
  if (auto hit = cast_to_outline(poly, pruned.back(), end_direction(false))) {
    pts.push_back(*hit);
  }
  return PolyChain(dedupe(std::move(pts), 1e-12 * std::max(1.0, len)));
}

std::vector<double> clearance_samples(const Polygon& poly, const PolyChain& axis, std::size_t m) {
  const double scale = std::max(poly.bounds().width(), poly.bounds().height());
  std::vector<double> out;
  out.reserve(m);
  for (const ChainSample& s : arc_length_sample(axis, m)) {
    const double c = distance_to_boundary(poly, s.point);
    if (!(c > 1e-12 * scale) || !contains(poly, s.point)) {
      std::ostringstream msg;
      msg << "axis sample at t=" << s.t << " (" << s.point.x << ", " << s.point.y
          << ") touches or leaves the outline; radius must be estimated on the pre-extension axis";
      throw MedialError(msg.str());
    }
    out.push_back(c);
  }
  return out;
}

// Portion of `chain` between arc lengths s0 < s1.
PolyChain sub_chain(const PolyChain& chain, double s0, double s1) {
  std::vector<Point2> pts{point_at_arc_length(chain, s0)};
  for (std::size_t i = 1; i + 1 < chain.size(); ++i) {
    const double s = chain.arc_length_at(i);
    if (s > s0 && s < s1) pts.push_back(chain.points()[i]);
  }
  pts.push_back(point_at_arc_length(chain, s1));
  return PolyChain(dedupe(std::move(pts), 1e-12 * std::max(1.0, chain.length())));
}

bool paired_axis_usable(const Polygon& poly, const PolyChain& axis) {
  if (polyline_self_intersects(axis.points())) return false;
  for (std::size_t i = 1; i + 1 < axis.size(); ++i) {
    if (!contains(poly, axis.points()[i])) return false;
  }
  return true;
}

TubeFit fit_paired(const Polygon& poly, const PolyChain& midpoints, const MedialConfig& cfg) {
  const auto& v = poly.vertices();
  const double w0 = 0.5 * distance(v.front(), v.back());
  const std::size_t k = v.size() / 2;
  const double w1 = 0.5 * distance(v[k - 1], v[k]);
  const double len = midpoints.length();
  if (!(w0 + w1 < len)) {
    throw MedialError("paired axis is shorter than its end half-widths; use the voronoi method");
  }
  PolyChain pruned = sub_chain(midpoints, w0, len - w1);
  const double r = estimate_radius(poly, pruned, cfg.radius_samples);
  return {Tube(resample_uniform(midpoints, cfg.n_points), r), std::move(pruned)};
}

double fold_angle(double a, double b) {
  double d = std::fmod(std::abs(a - b), std::numbers::pi);
  if (d > 0.5 * std::numbers::pi) d = std::numbers::pi - d;
  return d;
}

Point2 rotate(Point2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

Point2 left_normal(Point2 d) { return {-d.y, d.x}; }

}  // namespace

void MedialConfig::validate() const {
  if (n_points < 4) throw std::invalid_argument("MedialConfig.n_points must be >= 4");
  if (!(prune_clearance_fraction > 0.0 && prune_clearance_fraction < 1.0)) {
    throw std::invalid_argument("MedialConfig.prune_clearance_fraction must be in (0, 1)");
  }
  if (boundary_sample_spacing && !(*boundary_sample_spacing > 0.0)) {
    throw std::invalid_argument("MedialConfig.boundary_sample_spacing must be positive");
  }
  if (cap_segments < 1) throw std::invalid_argument("MedialConfig.cap_segments must be >= 1");
  if (radius_samples < 2) throw std::invalid_argument("MedialConfig.radius_samples must be >= 2");
}

double auto_boundary_spacing(const Polygon& poly) {
  const BoundingBox box = poly.bounds();
  const double perimeter = poly.perimeter();
  // area / perimeter is about half the stroke width of a band.
  const double thickness = poly.area() / perimeter;
  double spacing = std::min(std::min(box.width(), box.height()) / 50.0, thickness / 8.0);
  spacing = std::max(spacing, perimeter / static_cast<double>(kMaxBoundarySamples));
  return spacing;
}

MedialAxis extract_medial_axis_detailed(const Polygon& poly, const MedialConfig& cfg) {
  cfg.validate();
  const double spacing = cfg.boundary_sample_spacing.value_or(auto_boundary_spacing(poly));
  const double thickness = poly.area() / poly.perimeter();
  if (spacing > thickness) {
    std::ostringstream msg;
    msg << "polygon is too thin for boundary spacing " << spacing << " px (stroke half-width ~" << thickness
        << " px); use a finer boundary_sample_spacing";
    throw MedialError(msg.str());
  }
  if (poly.perimeter() / spacing > 4.0 * static_cast<double>(kMaxBoundarySamples)) {
    throw MedialError("boundary spacing would produce too many outline samples; use a coarser spacing");
  }

  SkeletonGraph g = build_skeleton(poly, spacing);
  if (g.nodes.empty()) {
    throw MedialError("no interior skeleton found; the polygon may be too thin for the boundary spacing");
  }

  std::size_t widest = 0;
  for (std::size_t u = 1; u < g.nodes.size(); ++u) {
    if (g.clearance[u] > g.clearance[widest]) widest = u;
  }
  std::vector<char> alive(g.nodes.size(), 0);
  for (std::size_t u : component_of(g, widest)) alive[u] = 1;

  prune_branches(g, alive, cfg.prune_clearance_fraction * g.clearance[widest]);

  std::vector<std::size_t> parent;
  const std::size_t end_a = farthest(g, alive, widest, parent);
  const std::size_t end_b = farthest(g, alive, end_a, parent);
  std::vector<Point2> path;
  for (std::size_t u = end_b; u != std::numeric_limits<std::size_t>::max(); u = parent[u]) {
    path.push_back(g.nodes[u]);
  }
  path = dedupe(std::move(path), 1e-12 * std::max(poly.bounds().width(), poly.bounds().height()));
  if (path.size() < 2) throw MedialError("pruning left no skeleton path");

  // Orient from the end nearer the first outline vertex so output is stable.
  if (distance(path.back(), poly.vertices().front()) < distance(path.front(), poly.vertices().front())) {
    std::reverse(path.begin(), path.end());
  }

  PolyChain pruned(std::move(path));
  PolyChain extended = extend_to_outline(poly, pruned, spacing);
  PolyChain axis = resample_uniform(extended, cfg.n_points);
  return {std::move(pruned), std::move(extended), std::move(axis)};
}

PolyChain extract_medial_axis(const Polygon& poly, const MedialConfig& cfg) {
  return extract_medial_axis_detailed(poly, cfg).axis;
}

PolyChain paired_midpoint_axis(const Polygon& poly) {
  const auto& v = poly.vertices();
  if (v.size() % 2 != 0 || v.size() < 4) {
    throw MedialError("paired midpoint axis needs an even vertex count >= 4, got " + std::to_string(v.size()));
  }
  const std::size_t k = v.size() / 2;
  std::vector<Point2> mids;
  mids.reserve(k);
  for (std::size_t i = 0; i < k; ++i) mids.push_back(0.5 * (v[i] + v[v.size() - 1 - i]));
  try {
    return PolyChain(std::move(mids));
  } catch (const GeometryError& e) {
    throw MedialError(std::string("paired midpoint axis is degenerate: ") + e.what());
  }
}

double estimate_radius(const Polygon& poly, const PolyChain& pruned_axis, std::size_t m) {
  const std::vector<double> c = clearance_samples(poly, pruned_axis, m);
  return std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
}

double radius_variation(const Polygon& poly, const PolyChain& pruned_axis, std::size_t m) {
  const std::vector<double> c = clearance_samples(poly, pruned_axis, m);
  const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
  const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
  return (*hi - *lo) / mean;
}

TubeFit fit_tube_detailed(const Polygon& poly, const MedialConfig& cfg) {
  cfg.validate();
  const bool even = poly.size() % 2 == 0 && poly.size() >= 4;
  if (cfg.method == AxisMethod::paired) return fit_paired(poly, paired_midpoint_axis(poly), cfg);
  if (cfg.method == AxisMethod::automatic && even) {
    try {
      PolyChain mids = paired_midpoint_axis(poly);
      if (paired_axis_usable(poly, mids)) return fit_paired(poly, mids, cfg);
    } catch (const MedialError&) {
      // fall through to the skeleton
    } catch (const GeometryError&) {
    }
  }
  MedialAxis m = extract_medial_axis_detailed(poly, cfg);
  const double r = estimate_radius(poly, m.pruned, cfg.radius_samples);
  return {Tube(std::move(m.axis), r), std::move(m.pruned)};
}

Tube fit_tube(const Polygon& poly, const MedialConfig& cfg) { return fit_tube_detailed(poly, cfg).tube; }

Polygon tube_envelope(const Tube& tube, std::size_t cap_segments) {
  if (cap_segments < 1) throw std::invalid_argument("cap_segments must be >= 1");
  const auto& p = tube.axis().points();
  const double r = tube.radius();
  const std::size_t n = p.size();
  const std::size_t segs = n - 1;

  std::vector<Point2> dir(segs);
  std::vector<Point2> nl(segs);
  for (std::size_t i = 0; i < segs; ++i) {
    dir[i] = (p[i + 1] - p[i]) / tube.axis().segment_length(i);
    nl[i] = left_normal(dir[i]);
  }
  // Signed turn at interior vertices; positive turns left.
  std::vector<double> turn(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    turn[i] = std::atan2(cross(dir[i - 1], dir[i]), dot(dir[i - 1], dir[i]));
    if (std::abs(turn[i]) >= std::numbers::pi - 1e-9) {
      throw MedialError("tube axis folds back on itself at vertex " + std::to_string(i));
    }
  }
  // Inner-corner retreat along each adjacent segment must fit in the segment.
  for (std::size_t s = 0; s < segs; ++s) {
    for (const double side : {1.0, -1.0}) {
      double used = 0.0;
      for (const std::size_t v : {s, s + 1}) {
        if (turn[v] * side > 0.0) used += r * std::tan(0.5 * std::abs(turn[v]));
      }
      if (used > tube.axis().segment_length(s)) {
        const std::size_t culprit = (turn[s] * side > 0.0 && s > 0) ? s : s + 1;
        std::ostringstream msg;
        msg << "envelope offset overlaps itself at axis vertex " << culprit << ": radius " << r
            << " exceeds the local bend allowance";
        throw MedialError(msg.str());
      }
    }
  }

  auto arc_steps = [&](double angle) {
    return std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(static_cast<double>(cap_segments) * std::abs(angle) / std::numbers::pi)));
  };
  auto miter = [&](Point2 center, Point2 n1, Point2 n2) { return center + r * (n1 + n2) / (1.0 + dot(n1, n2)); };

  std::vector<Point2> ring;
  // Right side, forward.
  ring.push_back(p[0] - r * nl[0]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Point2 n1 = -1.0 * nl[i - 1];
    const Point2 n2 = -1.0 * nl[i];
    if (turn[i] > 0.0) {
      const std::size_t k = arc_steps(turn[i]);
      for (std::size_t j = 0; j <= k; ++j) {
        ring.push_back(p[i] + r * rotate(n1, turn[i] * static_cast<double>(j) / static_cast<double>(k)));
      }
    } else if (turn[i] < 0.0) {
      ring.push_back(miter(p[i], n1, n2));
    } else {
      ring.push_back(p[i] + r * n2);
    }
  }
  ring.push_back(p[n - 1] - r * nl[segs - 1]);
  // End cap, counter-clockwise from the right side to the left side.
  for (std::size_t j = 1; j < cap_segments; ++j) {
    ring.push_back(p[n - 1] + r * rotate(-1.0 * nl[segs - 1],
                                         std::numbers::pi * static_cast<double>(j) / static_cast<double>(cap_segments)));
  }
  // Left side, backward.
  ring.push_back(p[n - 1] + r * nl[segs - 1]);
  for (std::size_t i = n - 2; i >= 1; --i) {
    const Point2 n1 = nl[i];
    const Point2 n2 = nl[i - 1];
    if (turn[i] < 0.0) {
      const std::size_t k = arc_steps(turn[i]);
      for (std::size_t j = 0; j <= k; ++j) {
        ring.push_back(p[i] + r * rotate(n1, -turn[i] * static_cast<double>(j) / static_cast<double>(k)));
      }
    } else if (turn[i] > 0.0) {
      ring.push_back(miter(p[i], n1, n2));
    } else {
      ring.push_back(p[i] + r * n2);
    }
  }
  ring.push_back(p[0] + r * nl[0]);
  for (std::size_t j = 1; j < cap_segments; ++j) {
    ring.push_back(p[0] + r * rotate(nl[0], std::numbers::pi * static_cast<double>(j) / static_cast<double>(cap_segments)));
  }

  try {
    return Polygon(std::move(ring));
  } catch (const GeometryError& e) {
    throw MedialError(std::string("tube envelope is not a simple polygon: ") + e.what());
  }
}

const char* to_string(Curvature c) { return c == Curvature::curved ? "curved" : "straight"; }

double max_segment_angle_difference(const PolyChain& axis) {
  double worst = 0.0;
  for (std::size_t i = 0; i < axis.segment_count(); ++i) {
    for (std::size_t j = i + 1; j < axis.segment_count(); ++j) {
      worst = std::max(worst, fold_angle(axis.segment_angle(i), axis.segment_angle(j)));
    }
  }
  return worst;
}

Curvature classify_curvature(const PolyChain& axis, double threshold) {
  // Angles recomputed through atan2 can land an ulp above an exact threshold.
  constexpr double kAngleTolerance = 1e-12;
  return max_segment_angle_difference(axis) > threshold + kAngleTolerance ? Curvature::curved
                                                                          : Curvature::straight;
}

}  // namespace tubekit
