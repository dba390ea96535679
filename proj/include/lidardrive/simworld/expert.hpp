#pragma once

#include <vector>

#include "lidardrive/controller/control_policy.hpp"
#include "lidardrive/simworld/vehicle.hpp"
#include "lidardrive/simworld/world.hpp"

namespace lidardrive::simworld {

struct ExpertConfig {
  double lookahead = 3.0;           // m, pure-pursuit target distance
  double min_speed_for_steer = 0.4; // m/s floor when converting curvature to yaw rate
  double cruise_throttle = 1.0;
  // Slow down ahead of sharp bends.
  double curve_window = 6.0;        // m of path checked ahead
  double curve_angle_deg = 35.0;    // heading change that counts as sharp
  double curve_throttle = 0.6;
  // Slow down when something sits close to the path ahead.
  double obstacle_window = 6.0;     // m of path checked ahead
  double obstacle_lateral = 1.6;    // m from the path
  double obstacle_throttle = 0.7;
  double finish_radius = 2.0;       // m from the last route point
};

/// Pure pursuit along a world-frame polyline with speed rules for bends
/// and nearby obstacles. Progress along the path only moves forward.
class ExpertDriver {
 public:
  ExpertDriver(std::vector<Vec2> path, const ExpertConfig& cfg, const VehicleParams& vehicle);

  controller::ControlCommand act(const VehicleState& s, const std::vector<ObstacleInstance>& obstacles);
  /// Steering toward the path with zero throttle.
  controller::ControlCommand stop(const VehicleState& s);

  bool finished(const VehicleState& s) const;
  double progress() const { return progress_; }
  double length() const { return cumulative_.back(); }
  /// Pose at the start of the path, facing along the first segment.
  VehicleState start_state() const;
  /// Point at arc length s (extrapolated along the end segments).
  Vec2 point_at(double s) const;

 private:
  void update_progress(Vec2 p);
  double steer_toward(const VehicleState& s, Vec2 target, double speed_hint) const;
  double heading_change(double s0, double s1) const;

  std::vector<Vec2> path_;
  std::vector<double> cumulative_;
  ExpertConfig cfg_;
  VehicleParams vehicle_;
  double progress_ = 0.0;
  std::size_t segment_ = 0;
};

}  // namespace lidardrive::simworld
