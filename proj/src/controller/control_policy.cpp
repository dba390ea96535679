#include "lidardrive/controller/control_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lidardrive::controller {

Command derive_command(const LocalPoint& rp1, const LocalPoint& rp2) {
  if (rp1.x <= -4.0 || rp2.x <= -8.0) return Command::kRight;
  if (rp1.x >= 4.0 || rp2.x >= 8.0) return Command::kLeft;
  return Command::kStraight;
}

AimGeometry aim_geometry(const LocalPoint& wp1, const LocalPoint& wp2) {
  AimGeometry g;
  g.aim = {(wp1.x + wp2.x) / 2.0, (wp1.y + wp2.y) / 2.0};
  if (g.aim.x == 0.0 && g.aim.y == 0.0) {
    g.degenerate = true;
    g.theta_deg = 90.0;
  } else {
    g.theta_deg = geonav::rad_to_deg(std::atan2(g.aim.y, g.aim.x));
  }
  g.gamma = 1.75 * std::hypot(wp1.x - wp2.x, wp1.y - wp2.y);
  return g;
}

double linear_speed(double omega_left, double omega_right, double wheel_radius) {
  return (omega_left + omega_right) / 2.0 * wheel_radius;
}

double pid_step(PidState& s, double error, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("pid_step: dt must be positive");
  const PidGains& g = s.gains;
  s.integral += error * dt;
  if (g.ki != 0.0) {
    const double lo = std::min(g.out_min / g.ki, g.out_max / g.ki);
    const double hi = std::max(g.out_min / g.ki, g.out_max / g.ki);
    s.integral = std::clamp(s.integral, lo, hi);
  }
  const double derivative = s.has_prev ? (error - s.prev_error) / dt : 0.0;
  s.prev_error = error;
  s.has_prev = true;
  const double out = g.kp * error + g.ki * s.integral + g.kd * derivative;
  return std::clamp(out, g.out_min, g.out_max);
}

ControlWeights init_control_weights(const std::array<double, 3>& alpha) {
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("init_control_weights: loss weights must be positive");
    }
  }
  ControlWeights w;
  w.beta[0][0] = alpha[1] / (alpha[1] + alpha[0]);
  w.beta[1][0] = 1.0 - w.beta[0][0];
  w.beta[0][1] = alpha[2] / (alpha[2] + alpha[0]);
  w.beta[1][1] = 1.0 - w.beta[0][1];
  return w;
}

ControlCommand fuse_controls(double mlp_st, double mlp_th, double pid_st, double pid_th,
                             const ControlWeights& w, double deadband) {
  const bool mlp_go = mlp_th >= deadband;
  const bool pid_go = pid_th >= deadband;
  ControlCommand c;
  if (mlp_go && pid_go) {
    const bool mlp_turn = std::abs(mlp_st) >= deadband;
    const bool pid_turn = std::abs(pid_st) >= deadband;
    // The two single-source cases are exclusive; only the remaining cases
    // (both turning or neither) blend.
    if (mlp_turn && !pid_turn) {
      c.steering = mlp_st;
    } else if (!mlp_turn && pid_turn) {
      c.steering = pid_st;
    } else {
      c.steering = w.beta[0][0] * mlp_st + w.beta[1][0] * pid_st;
    }
    c.throttle = w.beta[0][1] * mlp_th + w.beta[1][1] * pid_th;
  } else if (mlp_go) {
    c = {mlp_st, mlp_th};
  } else if (pid_go) {
    c = {pid_st, pid_th};
  }
  c.steering = std::clamp(c.steering, -1.0, 1.0);
  c.throttle = std::clamp(c.throttle, 0.0, 1.0);
  return c;
}

ControlPolicy::ControlPolicy(const ControllerConfig& cfg, const ControlWeights& weights)
    : cfg_(cfg), weights_(weights) {
  reset();
}

void ControlPolicy::reset() {
  lateral_ = PidState{cfg_.lateral};
  longitudinal_ = PidState{cfg_.longitudinal};
}

ControlPolicy::Decision ControlPolicy::step(const LocalPoint& wp1, const LocalPoint& wp2,
                                            double mlp_steering, double mlp_throttle,
                                            double omega_left, double omega_right) {
  Decision d;
  d.aim = aim_geometry(wp1, wp2);
  d.speed = linear_speed(omega_left, omega_right, cfg_.wheel_radius);
  d.mlp = {mlp_steering, mlp_throttle};
  d.pid.steering = pid_step(lateral_, d.aim.theta_deg - 90.0, cfg_.dt);
  d.pid.throttle = pid_step(longitudinal_, d.aim.gamma - d.speed, cfg_.dt);
  d.command = fuse_controls(mlp_steering, mlp_throttle, d.pid.steering, d.pid.throttle, weights_,
                            cfg_.deadband);
  return d;
}

}  // namespace lidardrive::controller
