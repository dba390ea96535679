#pragma once

#include <array>

#include "lidardrive/geonav/geo.hpp"
#include "lidardrive/model/network.hpp"

namespace lidardrive::trainer {

using LossWeights = std::array<double, 3>;  // waypoint, steering, throttle

/// Supervision for one observation.
struct Target {
  std::array<geonav::LocalPoint, 3> waypoints{};
  double steering = 0.0;
  double throttle = 0.0;
};

/// Per-task mean absolute errors.
struct TaskLosses {
  double waypoint = 0.0;  // mean over the 6 waypoint coordinates
  double steering = 0.0;
  double throttle = 0.0;

  double sum() const { return waypoint + steering + throttle; }
  double weighted(const LossWeights& a) const {
    return a[0] * waypoint + a[1] * steering + a[2] * throttle;
  }
};

/// Task losses and their weighted total as tape nodes.
struct LossVars {
  tensorgrad::Var waypoint;
  tensorgrad::Var steering;
  tensorgrad::Var throttle;
  tensorgrad::Var total;
};

LossVars mtl_loss(tensorgrad::Tape& t, const model::ForwardTrace& trace, const Target& target,
                  const LossWeights& alpha);

/// Plain arithmetic version on a finished prediction.
TaskLosses task_losses(const model::ModelOutput& out, const Target& target);
double mtl_loss_value(const model::ModelOutput& out, const Target& target, const LossWeights& alpha);

}  // namespace lidardrive::trainer
