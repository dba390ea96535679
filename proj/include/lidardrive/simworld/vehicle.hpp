#pragma once

#include <cmath>

#include "lidardrive/controller/control_policy.hpp"
#include "lidardrive/geonav/geo.hpp"
#include "lidardrive/simworld/world.hpp"

namespace lidardrive::simworld {

struct VehicleParams {
  double wheel_radius = 0.15;  // m
  double track = 0.55;         // m, distance between the driven wheels
  double max_speed = 1.25;     // m/s at full throttle
  double speed_tau = 0.5;      // s, first-order speed lag
  double max_yaw_rate = 1.0;   // rad/s at full steering
};

/// Differential-drive state. Heading is counter-clockwise from world +X.
struct VehicleState {
  Vec2 position;
  double heading = 0.0;
  double speed = 0.0;     // m/s, end of the last step
  double yaw_rate = 0.0;  // rad/s, held over the last step
  double accel = 0.0;     // m/s^2, mean over the last step
  double omega_left = 0.0;
  double omega_right = 0.0;
};

inline Vec2 forward_dir(double heading) { return {std::cos(heading), std::sin(heading)}; }
inline Vec2 left_dir(double heading) { return {-std::sin(heading), std::cos(heading)}; }

/// Bearing to north of a world-frame heading (north = +Y, east = -X).
double bearing_of(double heading);

/// World point expressed in the vehicle frame (+x left, +y forward).
geonav::LocalPoint to_local(const VehicleState& s, Vec2 world_point);
Vec2 to_world(const VehicleState& s, const geonav::LocalPoint& local);

/// Advances the unicycle by dt. Speed relaxes toward throttle * max_speed;
/// the yaw rate is -steering * max_yaw_rate. The pose moves along an exact
/// arc covering the distance travelled under the lagged speed, so the
/// displacement always lies along the mean heading of the step.
VehicleState step_vehicle(const VehicleState& s, const controller::ControlCommand& cmd, double dt,
                          const VehicleParams& params = {});

}  // namespace lidardrive::simworld
