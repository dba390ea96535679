#include "lidardrive/simworld/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lidardrive::simworld {

double bearing_of(double heading) { return geonav::wrap_angle(geonav::kPi / 2.0 - heading); }

geonav::LocalPoint to_local(const VehicleState& s, Vec2 p) {
  const Vec2 d = p - s.position;
  return {dot(d, left_dir(s.heading)), dot(d, forward_dir(s.heading))};
}

Vec2 to_world(const VehicleState& s, const geonav::LocalPoint& l) {
  return s.position + l.x * left_dir(s.heading) + l.y * forward_dir(s.heading);
}

VehicleState step_vehicle(const VehicleState& s, const controller::ControlCommand& cmd, double dt,
                          const VehicleParams& p) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_vehicle: dt must be positive");
  const double throttle = std::clamp(cmd.throttle, 0.0, 1.0);
  const double steering = std::clamp(cmd.steering, -1.0, 1.0);
  const double target = throttle * p.max_speed;

  VehicleState n = s;
  double distance;
  if (p.speed_tau > 0.0) {
    const double decay = std::exp(-dt / p.speed_tau);
    n.speed = target + (s.speed - target) * decay;
    distance = target * dt + (s.speed - target) * p.speed_tau * (1.0 - decay);
  } else {
    n.speed = target;
    distance = target * dt;
  }
  n.speed = std::clamp(n.speed, 0.0, p.max_speed);
  distance = std::max(distance, 0.0);
  n.accel = (n.speed - s.speed) / dt;

  n.yaw_rate = -steering * p.max_yaw_rate;
  const double turn = n.yaw_rate * dt;
  // Chord of an arc of length `distance` turning by `turn`.
  const double chord = std::abs(turn) > 1e-12 ? 2.0 * distance / turn * std::sin(turn / 2.0) : distance;
  n.position = s.position + chord * forward_dir(s.heading + turn / 2.0);
  n.heading = geonav::wrap_angle(s.heading + turn);

  const double half = n.yaw_rate * p.track / 2.0;
  n.omega_left = (n.speed - half) / p.wheel_radius;
  n.omega_right = (n.speed + half) / p.wheel_radius;
  return n;
}

}  // namespace lidardrive::simworld
