#pragma once

#include <vector>

#include "lidardrive/controller/control_policy.hpp"
#include "lidardrive/simworld/vehicle.hpp"
#include "lidardrive/simworld/world.hpp"

namespace lidardrive::simworld {

struct InterventionConfig {
  double horizon = 1.5;       // s of look-ahead under the current controls
  int substeps = 6;
  double clearance = 0.3;     // m from the vehicle reference point to any obstacle
  double min_takeover = 1.0;  // s the expert keeps control once it takes over
};

/// True when holding `cmd` for the horizon puts any predicted position off
/// traversable ground or within the clearance of an obstacle.
bool control_unsafe(const World& world, const std::vector<ObstacleInstance>& obstacles,
                    const VehicleState& s, const controller::ControlCommand& cmd,
                    const VehicleParams& vehicle, const InterventionConfig& cfg);

/// Hands control to the expert when the policy's proposal is unsafe and
/// returns it once the minimum takeover time has passed and the proposal is
/// safe again.
class InterventionMonitor {
 public:
  explicit InterventionMonitor(const InterventionConfig& cfg) : cfg_(cfg) {}

  /// Call once per tick with the safety of the policy's proposal; returns
  /// true when the expert drives this tick.
  bool expert_drives(bool proposal_unsafe, double dt);

  int count() const { return count_; }
  double time() const { return time_; }
  bool active() const { return active_; }

 private:
  InterventionConfig cfg_;
  bool active_ = false;
  double elapsed_ = 0.0;
  int count_ = 0;
  double time_ = 0.0;
};

}  // namespace lidardrive::simworld
