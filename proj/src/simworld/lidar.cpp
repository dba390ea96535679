#include "lidardrive/simworld/lidar.hpp"

#include <cmath>
#include <limits>

namespace lidardrive::simworld {

using geonav::deg_to_rad;

double LidarConfig::ring_elevation_deg(int ring) const {
  if (rings <= 1) return elevation_min_deg;
  return elevation_min_deg + (elevation_max_deg - elevation_min_deg) * ring / (rings - 1);
}

double LidarConfig::azimuth_deg(int step) const {
  const double span = 360.0 / azimuth_steps;
  return -180.0 + (step + 0.5) * span;
}

Ray3 ray_direction(double elevation_deg, double azimuth_deg) {
  const double el = deg_to_rad(elevation_deg), az = deg_to_rad(azimuth_deg);
  return {std::cos(el) * std::sin(az), std::cos(el) * std::cos(az), std::sin(el)};
}

std::optional<double> ray_prism_hit(Vec2 o, double oz, double dx, double dy, double dz,
                                    const ObstacleInstance& prism) {
  const Polygon& poly = prism.polygon;
  const std::size_t n = poly.size();
  const double orient = signed_area(poly) >= 0.0 ? 1.0 : -1.0;
  double t_in = 0.0;
  double t_out = std::numeric_limits<double>::infinity();
  bool entered_through_side = false;
  // Each edge bounds a half-plane; the inside lies to the left of a
  // counter-clockwise edge.
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % n];
    const Vec2 e = b - a;
    const double num = orient * cross(e, o - a);  // > 0 when origin is inside this half-plane
    const double den = orient * (e.x * dy - e.y * dx);  // rate of change along the ray
    if (den == 0.0) {
      if (num < 0.0) return std::nullopt;
      continue;
    }
    const double t = -num / den;
    if (den > 0.0) {
      if (t > t_in) {
        t_in = t;
        entered_through_side = true;
      }
    } else {
      t_out = std::min(t_out, t);
    }
    if (t_in > t_out) return std::nullopt;
  }
  if (!entered_through_side) return std::nullopt;  // origin inside the footprint

  const double z_in = oz + t_in * dz;
  if (z_in >= 0.0 && z_in <= prism.height) return t_in;
  if (z_in > prism.height && dz < 0.0) {
    const double t_top = (prism.height - oz) / dz;
    if (t_top >= t_in && t_top <= t_out) return t_top;
  }
  return std::nullopt;
}

projection::LabeledPointCloud raycast_scan(const World& world,
                                           const std::vector<ObstacleInstance>& obstacles,
                                           const VehicleState& pose, const LidarConfig& cfg) {
  projection::LabeledPointCloud cloud;
  const double h = cfg.mount_height;
  const Vec2 fwd = forward_dir(pose.heading), left = left_dir(pose.heading);

  for (int a = 0; a < cfg.azimuth_steps; ++a) {
    const double az = cfg.azimuth_deg(a);
    // Horizontal direction of this column in the world, shared by all rings.
    const Ray3 flat = ray_direction(0.0, az);
    const Vec2 dir = flat.x * left + flat.y * fwd;

    // Broad phase: obstacles whose bounding circle meets this column's line
    // ahead of the sensor.
    std::vector<const ObstacleInstance*> near;
    for (const auto& o : obstacles) {
      const Vec2 rel = o.center - pose.position;
      const double along = dot(rel, dir);
      if (along + o.radius < 0.0 || along - o.radius > cfg.max_range) continue;
      if (std::abs(cross(dir, rel)) > o.radius) continue;
      near.push_back(&o);
    }

    for (int r = 0; r < cfg.rings; ++r) {
      const Ray3 d = ray_direction(cfg.ring_elevation_deg(r), az);
      const double horiz = std::hypot(d.x, d.y);
      const double dx = dir.x * horiz, dy = dir.y * horiz;
      double best = cfg.max_range;
      int cls = -1;
      if (d.z < 0.0) {
        const double t = h / -d.z;
        if (t <= best) {
          best = t;
          cls = world.ground_class_at({pose.position.x + t * dx, pose.position.y + t * dy});
        }
      }
      for (const ObstacleInstance* o : near) {
        const auto t = ray_prism_hit(pose.position, h, dx, dy, d.z, *o);
        if (t && *t < best) {
          best = *t;
          cls = o->class_id;
        }
      }
      if (cls < 0) continue;
      projection::LabeledPoint p;
      p.x = best * d.x;
      p.y = best * d.y;
      p.z = best * d.z;
      p.class_id = static_cast<std::uint8_t>(cls);
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

}  // namespace lidardrive::simworld
