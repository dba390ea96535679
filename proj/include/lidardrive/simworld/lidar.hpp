#pragma once

#include <optional>
#include <vector>

#include "lidardrive/projection/grid.hpp"
#include "lidardrive/simworld/vehicle.hpp"
#include "lidardrive/simworld/world.hpp"

namespace lidardrive::simworld {

struct LidarConfig {
  int rings = 16;
  double elevation_min_deg = -30.67;
  double elevation_max_deg = 10.67;
  int azimuth_steps = 360;
  double max_range = 80.0;    // m
  double mount_height = 1.0;  // m above ground

  static LidarConfig desk() { return {}; }
  /// The 32-ring, 1080-step profile.
  static LidarConfig full() { return {32, -30.67, 10.67, 1080, 80.0, 1.0}; }

  double ring_elevation_deg(int ring) const;
  /// Azimuth of a column, positive toward the sensor's left; columns are
  /// centered half a step off the forward axis.
  double azimuth_deg(int step) const;
};

/// Unit ray direction in the sensor frame (+x left, +y forward, +z up).
struct Ray3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

Ray3 ray_direction(double elevation_deg, double azimuth_deg);

/// Distance along a unit world ray (origin at `origin_xy`, height `origin_z`,
/// direction (dx, dy, dz)) to a prism's surface, clipping the ray against the
/// polygon's edge half-planes. Hits behind the origin or from inside the
/// prism are ignored.
std::optional<double> ray_prism_hit(Vec2 origin_xy, double origin_z, double dx, double dy, double dz,
                                    const ObstacleInstance& prism);

/// One sweep from a vehicle pose: nearest ground or obstacle return per ray,
/// labeled with the class of what it hit. Points are in the sensor frame
/// (sensor at the origin).
projection::LabeledPointCloud raycast_scan(const World& world,
                                           const std::vector<ObstacleInstance>& obstacles,
                                           const VehicleState& pose, const LidarConfig& cfg);

}  // namespace lidardrive::simworld
