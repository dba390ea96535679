#include "lidardrive/simworld/intervention.hpp"

namespace lidardrive::simworld {

bool control_unsafe(const World& world, const std::vector<ObstacleInstance>& obstacles,
                    const VehicleState& s, const controller::ControlCommand& cmd,
                    const VehicleParams& vehicle, const InterventionConfig& cfg) {
  const double dt = cfg.horizon / cfg.substeps;
  VehicleState p = s;
  for (int i = 0; i < cfg.substeps; ++i) {
    p = step_vehicle(p, cmd, dt, vehicle);
    if (!world.traversable(p.position)) return true;
    if (obstacle_clearance(obstacles, p.position) < cfg.clearance) return true;
  }
  return false;
}

bool InterventionMonitor::expert_drives(bool proposal_unsafe, double dt) {
  if (active_) {
    if (elapsed_ >= cfg_.min_takeover - 1e-9 && !proposal_unsafe) {
      active_ = false;
      return false;
    }
  } else if (proposal_unsafe) {
    active_ = true;
    elapsed_ = 0.0;
    ++count_;
  } else {
    return false;
  }
  elapsed_ += dt;
  time_ += dt;
  return true;
}

}  // namespace lidardrive::simworld
