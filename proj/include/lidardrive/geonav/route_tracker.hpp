#pragma once

#include <cstddef>
#include <vector>

#include "lidardrive/geonav/geo.hpp"

namespace lidardrive::geonav {

/// The two upcoming route points in the vehicle frame.
struct RouteView {
  LocalPoint rp1;
  LocalPoint rp2;
  std::size_t next_index = 0;  // index of rp1 in the route
};

/// Tracks progress along a GNSS route and exposes the next two route points.
///
/// A route point is consumed once the fix is within `reach_radius` of it, or
/// once the fix has moved past it along the following segment while still
/// within `pass_radius`. The final point is never consumed; past the
/// penultimate point rp2 duplicates rp1.
class RouteTracker {
 public:
  explicit RouteTracker(std::vector<GeoPoint> route, double reach_radius = 3.0,
                        double pass_radius = 6.0);

  RouteView update(const GeoPoint& fix, double bearing);

  std::size_t next_index() const { return next_; }
  const std::vector<GeoPoint>& route() const { return route_; }

 private:
  std::vector<GeoPoint> route_;
  double reach_radius_;
  double pass_radius_;
  std::size_t next_ = 0;
};

}  // namespace lidardrive::geonav
