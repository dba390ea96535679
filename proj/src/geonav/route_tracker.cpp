#include "lidardrive/geonav/route_tracker.hpp"

#include <cmath>
#include <stdexcept>

namespace lidardrive::geonav {

RouteTracker::RouteTracker(std::vector<GeoPoint> route, double reach_radius, double pass_radius)
    : route_(std::move(route)), reach_radius_(reach_radius), pass_radius_(pass_radius) {
  if (route_.empty()) throw std::invalid_argument("RouteTracker: empty route");
}

RouteView RouteTracker::update(const GeoPoint& fix, double bearing) {
  while (next_ + 1 < route_.size()) {
    const GeoOffset to_pt = geo_delta(fix, route_[next_]);
    const double dist = std::hypot(to_pt.east, to_pt.north);
    if (dist < reach_radius_) {
      ++next_;
      continue;
    }
    const GeoOffset seg = geo_delta(route_[next_], route_[next_ + 1]);
    // Fix relative to the point, projected on the outgoing segment.
    const double along = -to_pt.east * seg.east - to_pt.north * seg.north;
    if (dist < pass_radius_ && along > 0.0) {
      ++next_;
      continue;
    }
    break;
  }
  const std::size_t i2 = std::min(next_ + 1, route_.size() - 1);
  RouteView view;
  view.rp1 = rotate_to_local(geo_delta(fix, route_[next_]), bearing);
  view.rp2 = rotate_to_local(geo_delta(fix, route_[i2]), bearing);
  view.next_index = next_;
  return view;
}

}  // namespace lidardrive::geonav
