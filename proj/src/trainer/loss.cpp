#include "lidardrive/trainer/loss.hpp"

#include <cmath>

namespace lidardrive::trainer {

namespace tg = tensorgrad;

namespace {

tg::Tensor waypoint_tensor(const std::array<geonav::LocalPoint, 3>& wps) {
  return tg::Tensor::vector({wps[0].x, wps[0].y, wps[1].x, wps[1].y, wps[2].x, wps[2].y});
}

}  // namespace

LossVars mtl_loss(tg::Tape& t, const model::ForwardTrace& trace, const Target& target,
                  const LossWeights& alpha) {
  LossVars v;
  v.waypoint = tg::l1_loss(t, trace.waypoints, t.constant(waypoint_tensor(target.waypoints)));
  v.steering = tg::l1_loss(t, trace.steering, t.constant(tg::Tensor::scalar(target.steering)));
  v.throttle = tg::l1_loss(t, trace.throttle, t.constant(tg::Tensor::scalar(target.throttle)));
  v.total = tg::add(t, tg::add(t, tg::affine(t, v.waypoint, alpha[0]), tg::affine(t, v.steering, alpha[1])),
                    tg::affine(t, v.throttle, alpha[2]));
  return v;
}

TaskLosses task_losses(const model::ModelOutput& out, const Target& target) {
  TaskLosses l;
  double wp = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    wp += std::abs(out.waypoints[k].x - target.waypoints[k].x);
    wp += std::abs(out.waypoints[k].y - target.waypoints[k].y);
  }
  l.waypoint = wp / 6.0;
  l.steering = std::abs(out.steering - target.steering);
  l.throttle = std::abs(out.throttle - target.throttle);
  return l;
}

double mtl_loss_value(const model::ModelOutput& out, const Target& target, const LossWeights& alpha) {
  return task_losses(out, target).weighted(alpha);
}

}  // namespace lidardrive::trainer
