#pragma once

#include <array>
#include <span>
#include <stdexcept>

namespace lidardrive::geonav {

/// Earth circumferences used by the planar GNSS model (meters).
inline constexpr double kEquatorialCircumference = 40'075'000.0;
inline constexpr double kMeridionalCircumference = 40'008'000.0;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Geographic fix in degrees on a spherical earth.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

/// Vehicle-local point in meters: +y forward, +x to the vehicle's left.
/// The ego vehicle always sits at (0, 0).
struct LocalPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Planar offset between two fixes, meters east / north.
struct GeoOffset {
  double east = 0.0;
  double north = 0.0;
};

class DegenerateLatitudeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Wraps an angle to [-pi, pi).
double wrap_angle(double rad);

/// Offset from `ro` to `rp` using the equatorial/meridional circumference model.
/// Throws std::invalid_argument on non-finite or out-of-range input.
GeoOffset geo_delta(const GeoPoint& ro, const GeoPoint& rp);

/// Inverse of geo_delta: the fix lying (east, north) meters from `ro`.
/// Throws DegenerateLatitudeError when cos(ro.lat) vanishes.
GeoPoint geo_delta_inverse(const GeoPoint& ro, double east, double north);

/// Rotates a global offset into the vehicle frame: [x; y] = R(bearing)^T [east; north].
LocalPoint rotate_to_local(const GeoOffset& offset, double bearing);

/// Forward rotation, inverse of rotate_to_local.
GeoOffset rotate_to_global(const LocalPoint& p, double bearing);

/// Cumulative waypoints: wp[0] = origin + d[0], wp[i+1] = wp[i] + d[i+1].
/// Requires exactly three deltas.
std::array<LocalPoint, 3> accumulate_waypoints(std::span<const LocalPoint> deltas,
                                               LocalPoint origin = {});

}  // namespace lidardrive::geonav
