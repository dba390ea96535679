#pragma once

#include <array>

#include "lidardrive/geonav/geo.hpp"

namespace lidardrive::controller {

using geonav::LocalPoint;

enum class Command : int { kStraight = 0, kLeft = 1, kRight = 2 };

/// Right when rp1.x <= -4 m or rp2.x <= -8 m (checked first), left when
/// rp1.x >= 4 m or rp2.x >= 8 m, otherwise straight.
Command derive_command(const LocalPoint& rp1, const LocalPoint& rp2);

struct AimGeometry {
  LocalPoint aim;            // midpoint of the first two waypoints
  double theta_deg = 90.0;   // direction of the aim point; 90 is dead ahead
  double gamma = 0.0;        // desired speed, m/s
  bool degenerate = false;   // aim point at the origin; theta pinned to 90
};

AimGeometry aim_geometry(const LocalPoint& wp1, const LocalPoint& wp2);

/// Mean wheel angular speed times wheel radius, m/s.
double linear_speed(double omega_left, double omega_right, double wheel_radius = 0.15);

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double out_min = -1.0;
  double out_max = 1.0;
};

struct PidState {
  PidGains gains;
  double integral = 0.0;
  double prev_error = 0.0;
  bool has_prev = false;
};

/// Textbook PID. The integral is clamped so ki * integral stays inside the
/// output range; the derivative term is zero on the first call.
double pid_step(PidState& state, double error, double dt);

/// Blend weights, beta[row][col]: column 0 steering, column 1 throttle;
/// row 0 weighs the MLP, row 1 the PID.
struct ControlWeights {
  std::array<std::array<double, 2>, 2> beta{{{0.5, 0.5}, {0.5, 0.5}}};
};

/// Loss weights (waypoint, steering, throttle) to blend weights.
ControlWeights init_control_weights(const std::array<double, 3>& alpha);

struct ControlCommand {
  double steering = 0.0;  // [-1, 1], negative turns toward +x (left)
  double throttle = 0.0;  // [0, 1]
};

ControlCommand fuse_controls(double mlp_steering, double mlp_throttle, double pid_steering,
                             double pid_throttle, const ControlWeights& w, double deadband = 0.1);

struct ControllerConfig {
  PidGains lateral{0.02, 0.001, 0.005, -1.0, 1.0};
  PidGains longitudinal{0.8, 0.1, 0.0, 0.0, 1.0};
  double dt = 0.25;
  double wheel_radius = 0.15;
  double deadband = 0.1;
};

/// One controller instance per vehicle: the PID pair plus the fusion rule.
class ControlPolicy {
 public:
  ControlPolicy(const ControllerConfig& cfg, const ControlWeights& weights);

  struct Decision {
    ControlCommand command;
    ControlCommand mlp;
    ControlCommand pid;
    AimGeometry aim;
    double speed = 0.0;
  };

  Decision step(const LocalPoint& wp1, const LocalPoint& wp2, double mlp_steering,
                double mlp_throttle, double omega_left, double omega_right);
  void reset();

  const ControlWeights& weights() const { return weights_; }

 private:
  ControllerConfig cfg_;
  ControlWeights weights_;
  PidState lateral_;
  PidState longitudinal_;
};

}  // namespace lidardrive::controller
