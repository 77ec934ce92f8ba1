#pragma once

#include "tubekit/geometry.hpp"

namespace tubekit {

/// A text instance as a polygonal medial axis swept by a constant-radius disk.
///
/// The axis must not cross itself and the radius must be finite and positive.
class Tube {
 public:
  Tube(PolyChain axis, double radius);

  const PolyChain& axis() const { return axis_; }
  double radius() const { return radius_; }
  std::size_t point_count() const { return axis_.size(); }

 private:
  PolyChain axis_;
  double radius_;
};

}  // namespace tubekit
