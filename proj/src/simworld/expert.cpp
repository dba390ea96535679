#include "lidardrive/simworld/expert.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lidardrive::simworld {

ExpertDriver::ExpertDriver(std::vector<Vec2> path, const ExpertConfig& cfg, const VehicleParams& vehicle)
    : cfg_(cfg), vehicle_(vehicle) {
  for (const Vec2& p : path) {
    if (path_.empty() || norm(p - path_.back()) > 1e-9) path_.push_back(p);
  }
  if (path_.size() < 2) throw std::invalid_argument("ExpertDriver: path needs two distinct points");
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < path_.size(); ++i) {
    cumulative_.push_back(cumulative_.back() + norm(path_[i] - path_[i - 1]));
  }
}

VehicleState ExpertDriver::start_state() const {
  VehicleState s;
  s.position = path_.front();
  const Vec2 d = path_[1] - path_[0];
  s.heading = std::atan2(d.y, d.x);
  return s;
}

Vec2 ExpertDriver::point_at(double s) const {
  if (s <= 0.0) {
    const Vec2 d = path_[1] - path_[0];
    return path_[0] + (s / norm(d)) * d;
  }
  const std::size_t n = path_.size();
  if (s >= cumulative_.back()) {
    const Vec2 d = path_[n - 1] - path_[n - 2];
    return path_[n - 1] + ((s - cumulative_.back()) / norm(d)) * d;
  }
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  const double t = (s - cumulative_[i]) / (cumulative_[i + 1] - cumulative_[i]);
  return path_[i] + t * (path_[i + 1] - path_[i]);
}

void ExpertDriver::update_progress(Vec2 p) {
  // Nearest point on the segments within a short window ahead of the last
  // projection; progress never moves backward.
  double best_d = INFINITY, best_s = progress_;
  std::size_t best_seg = segment_;
  for (std::size_t i = segment_; i + 1 < path_.size(); ++i) {
    if (cumulative_[i] > progress_ + 12.0) break;
    const Vec2 a = path_[i], b = path_[i + 1];
    const Vec2 ab = b - a;
    const double len = cumulative_[i + 1] - cumulative_[i];
    const double t = std::clamp(dot(p - a, ab) / (len * len), 0.0, 1.0);
    const double d = norm(p - (a + t * ab));
    if (d < best_d) {
      best_d = d;
      best_s = cumulative_[i] + t * len;
      best_seg = i;
    }
  }
  if (best_s >= progress_) {
    progress_ = best_s;
    segment_ = best_seg;
  }
}

double ExpertDriver::steer_toward(const VehicleState& s, Vec2 target, double speed_hint) const {
  const geonav::LocalPoint l = to_local(s, target);
  const double d2 = l.x * l.x + l.y * l.y;
  if (d2 < 1e-12) return 0.0;
  const double curvature = 2.0 * l.x / d2;  // positive toward the left
  const double v = std::max(speed_hint, cfg_.min_speed_for_steer);
  const double yaw_rate = v * curvature;
  return std::clamp(-yaw_rate / vehicle_.max_yaw_rate, -1.0, 1.0);
}

double ExpertDriver::heading_change(double s0, double s1) const {
  // Largest absolute heading difference between the path direction at s0
  // and anywhere in (s0, s1].
  auto dir = [&](double s) {
    const Vec2 d = point_at(s + 0.25) - point_at(s - 0.25);
    return std::atan2(d.y, d.x);
  };
  const double h0 = dir(s0);
  double worst = 0.0;
  for (double s = s0 + 0.5; s <= s1; s += 0.5) {
    worst = std::max(worst, std::abs(geonav::wrap_angle(dir(s) - h0)));
  }
  return worst;
}

controller::ControlCommand ExpertDriver::act(const VehicleState& s,
                                             const std::vector<ObstacleInstance>& obstacles) {
  update_progress(s.position);
  double throttle = cfg_.cruise_throttle;
  const double end = std::min(progress_ + cfg_.curve_window, cumulative_.back());
  if (heading_change(progress_, end) > geonav::deg_to_rad(cfg_.curve_angle_deg)) {
    throttle = std::min(throttle, cfg_.curve_throttle);
  }
  const double obs_end = std::min(progress_ + cfg_.obstacle_window, cumulative_.back());
  for (double q = progress_; q <= obs_end; q += 0.5) {
    if (obstacle_clearance(obstacles, point_at(q)) < cfg_.obstacle_lateral) {
      throttle = std::min(throttle, cfg_.obstacle_throttle);
      break;
    }
  }
  const double target_speed = throttle * vehicle_.max_speed;
  const double steering = steer_toward(s, point_at(progress_ + cfg_.lookahead), target_speed);
  return {steering, throttle};
}

controller::ControlCommand ExpertDriver::stop(const VehicleState& s) {
  update_progress(s.position);
  return {steer_toward(s, point_at(progress_ + cfg_.lookahead), s.speed), 0.0};
}

bool ExpertDriver::finished(const VehicleState& s) const {
  return norm(s.position - path_.back()) < cfg_.finish_radius;
}

}  // namespace lidardrive::simworld
