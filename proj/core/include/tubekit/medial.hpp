#pragma once

#include <cstddef>
#include <optional>

#include "tubekit/geometry.hpp"
#include "tubekit/tube.hpp"

namespace tubekit {

/// Raised when a polygon cannot be converted into a tube.
class MedialError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AxisMethod {
  voronoi,  ///< pruned Voronoi skeleton of the resampled outline
  paired,   ///< midpoints of vertex pairs (i, 2k-1-i); 2k-vertex annotations only
  automatic ///< paired when the vertex count is even and the result is valid, else voronoi
};

struct MedialConfig {
  std::size_t n_points = 5;
  /// Outline resampling step in pixels; unset picks one from the polygon size.
  std::optional<double> boundary_sample_spacing;
  double prune_clearance_fraction = 0.5;
  std::size_t cap_segments = 8;
  /// Axis samples used for radius and radius-variation estimates.
  std::size_t radius_samples = 100;
  AxisMethod method = AxisMethod::voronoi;

  void validate() const;
};

/// Intermediate products of skeleton extraction.
struct MedialAxis {
  PolyChain pruned;    ///< longest branch-free path before end extension
  PolyChain extended;  ///< `pruned` with both ends pushed to the outline
  PolyChain axis;      ///< `extended` resampled to n_points
};

/// Outline resampling step used when the config leaves it unset.
double auto_boundary_spacing(const Polygon& poly);

MedialAxis extract_medial_axis_detailed(const Polygon& poly, const MedialConfig& cfg);

/// Branch-free medial axis with ends extended to the outline, resampled to
/// cfg.n_points uniform arc-length points.
PolyChain extract_medial_axis(const Polygon& poly, const MedialConfig& cfg);

/// Midpoints of the vertex pairs (i, 2k-1-i) of a 2k-vertex polygon laid out
/// as one side followed by the other side reversed. Throws on odd counts.
PolyChain paired_midpoint_axis(const Polygon& poly);

/// Mean distance to the outline over `m` uniform samples of a pre-extension
/// axis. Throws if any sample touches the outline.
double estimate_radius(const Polygon& poly, const PolyChain& pruned_axis, std::size_t m);

/// (max - min) / mean of the outline distance over `m` samples of the axis.
double radius_variation(const Polygon& poly, const PolyChain& pruned_axis, std::size_t m);

struct TubeFit {
  Tube tube;
  PolyChain pruned_axis;  ///< the chain the radius was averaged over
};

TubeFit fit_tube_detailed(const Polygon& poly, const MedialConfig& cfg);

/// Axis from extract_medial_axis (or the paired fast path, per cfg.method),
/// radius averaged over the pre-extension axis.
Tube fit_tube(const Polygon& poly, const MedialConfig& cfg);

/// Polygonal region within `radius` of the axis: offset sides, round joins on
/// the outside of bends, mitred inside corners, and `cap_segments`-chord
/// semicircular end caps. Throws MedialError naming the vertex when the radius
/// is too large for a bend.
Polygon tube_envelope(const Tube& tube, std::size_t cap_segments);

enum class Curvature { straight, curved };

const char* to_string(Curvature c);

/// Largest angle between any two segments, folded modulo pi into [0, pi/2].
double max_segment_angle_difference(const PolyChain& axis);

/// Curved iff some pair of segments differs in angle by strictly more than
/// `threshold` radians.
Curvature classify_curvature(const PolyChain& axis, double threshold = 0.1);

}  // namespace tubekit
