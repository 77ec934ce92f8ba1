#include "tubekit/tube.hpp"

#include <cmath>

namespace tubekit {

Tube::Tube(PolyChain axis, double radius) : axis_(std::move(axis)), radius_(radius) {
  if (!std::isfinite(radius_) || !(radius_ > 0.0)) {
    throw GeometryError("tube radius must be finite and positive, got " + std::to_string(radius_));
  }
  if (polyline_self_intersects(axis_.points())) throw GeometryError("tube axis intersects itself");
}

}  // namespace tubekit
