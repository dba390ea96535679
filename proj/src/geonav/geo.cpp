#include "lidardrive/geonav/geo.hpp"

#include <cmath>
#include <string>

namespace lidardrive::geonav {

namespace {

void require_valid(const GeoPoint& p, const char* what) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon)) {
    throw std::invalid_argument(std::string(what) + ": non-finite coordinate");
  }
  if (p.lat < -90.0 || p.lat > 90.0 || p.lon < -180.0 || p.lon > 180.0) {
    throw std::invalid_argument(std::string(what) + ": coordinate out of range");
  }
}

}  // namespace

double wrap_angle(double rad) {
  double w = std::fmod(rad + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  w -= kPi;
  // fmod can land exactly on +pi after the shift for inputs just below -pi.
  if (w >= kPi) w -= 2.0 * kPi;
  return w;
}

GeoOffset geo_delta(const GeoPoint& ro, const GeoPoint& rp) {
  require_valid(ro, "geo_delta origin");
  require_valid(rp, "geo_delta target");
  const double east =
      (rp.lon - ro.lon) * kEquatorialCircumference * std::cos(deg_to_rad(ro.lat)) / 360.0;
  const double north = (rp.lat - ro.lat) * kMeridionalCircumference / 360.0;
  return {east, north};
}

GeoPoint geo_delta_inverse(const GeoPoint& ro, double east, double north) {
  require_valid(ro, "geo_delta_inverse origin");
  if (!std::isfinite(east) || !std::isfinite(north)) {
    throw std::invalid_argument("geo_delta_inverse: non-finite offset");
  }
  const double cos_lat = std::cos(deg_to_rad(ro.lat));
  if (std::abs(cos_lat) < 1e-9) {
    throw DegenerateLatitudeError("geo_delta_inverse: origin latitude too close to a pole");
  }
  GeoPoint out;
  out.lon = ro.lon + east * 360.0 / (kEquatorialCircumference * cos_lat);
  out.lat = ro.lat + north * 360.0 / kMeridionalCircumference;
  return out;
}

LocalPoint rotate_to_local(const GeoOffset& offset, double bearing) {
  if (!std::isfinite(offset.east) || !std::isfinite(offset.north) || !std::isfinite(bearing)) {
    throw std::invalid_argument("rotate_to_local: non-finite input");
  }
  const double c = std::cos(bearing);
  const double s = std::sin(bearing);
  // R = [[c, -s], [s, c]]; R^T = [[c, s], [-s, c]].
  return {c * offset.east + s * offset.north, -s * offset.east + c * offset.north};
}

GeoOffset rotate_to_global(const LocalPoint& p, double bearing) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(bearing)) {
    throw std::invalid_argument("rotate_to_global: non-finite input");
  }
  const double c = std::cos(bearing);
  const double s = std::sin(bearing);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

std::array<LocalPoint, 3> accumulate_waypoints(std::span<const LocalPoint> deltas,
                                               LocalPoint origin) {
  if (deltas.size() != 3) {
    throw std::invalid_argument("accumulate_waypoints: expected exactly 3 deltas, got " +
                                std::to_string(deltas.size()));
  }
  std::array<LocalPoint, 3> out{};
  LocalPoint cur = origin;
  for (std::size_t i = 0; i < 3; ++i) {
    cur.x += deltas[i].x;
    cur.y += deltas[i].y;
    out[i] = cur;
  }
  return out;
}

}  // namespace lidardrive::geonav
