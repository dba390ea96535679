#include "lidardrive/simworld/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lidardrive::simworld {

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

bool point_in_polygon(const Polygon& poly, Vec2 p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

namespace {

double segment_distance(Vec2 a, Vec2 b, Vec2 p) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

}  // namespace

double distance_to_polygon(const Polygon& poly, Vec2 p) {
  if (poly.empty()) return std::numeric_limits<double>::infinity();
  if (point_in_polygon(poly, p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    best = std::min(best, segment_distance(poly[j], poly[i], p));
  }
  return best;
}

double signed_area(const Polygon& poly) {
  double a = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) a += cross(poly[j], poly[i]);
  return a / 2.0;
}

bool is_convex(const Polygon& poly) {
  if (poly.size() < 3) return false;
  int sign = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double c = cross(poly[(i + 1) % n] - poly[i], poly[(i + 2) % n] - poly[(i + 1) % n]);
    if (c == 0.0) continue;
    const int s = c > 0.0 ? 1 : -1;
    if (sign == 0) sign = s;
    else if (s != sign) return false;
  }
  return sign != 0;
}

const char* condition_name(Condition c) {
  switch (c) {
    case Condition::kLight: return "light";
    case Condition::kModerate: return "moderate";
    case Condition::kDense: return "dense";
  }
  return "?";
}

Condition parse_condition(const std::string& s) {
  if (s == "light") return Condition::kLight;
  if (s == "moderate") return Condition::kModerate;
  if (s == "dense") return Condition::kDense;
  throw std::invalid_argument("unknown condition '" + s + "' (light, moderate, dense)");
}

bool is_traversable_class(std::uint8_t class_id) {
  return class_id == 9 || class_id == 10 || class_id == 11;
}

std::uint8_t World::ground_class_at(Vec2 p) const {
  for (auto it = regions.rbegin(); it != regions.rend(); ++it) {
    if (point_in_polygon(it->polygon, p)) return it->class_id;
  }
  return default_class;
}

bool World::traversable(Vec2 p) const { return is_traversable_class(ground_class_at(p)); }

std::vector<ObstacleInstance> World::obstacles_at(Condition c, double time) const {
  std::vector<ObstacleInstance> out;
  for (const auto& o : obstacles) {
    if (o.density_level > static_cast<int>(c)) continue;
    Vec2 shift;
    if (o.period > 0.0 && (o.velocity.x != 0.0 || o.velocity.y != 0.0)) {
      // Triangle wave: out for half a period, back for the other half.
      const double half = o.period / 2.0;
      const double phase = std::fmod(time, o.period);
      const double travel = phase < half ? phase : o.period - phase;
      shift = travel * o.velocity;
    }
    ObstacleInstance inst;
    inst.class_id = o.class_id;
    inst.height = o.height;
    inst.polygon.reserve(o.polygon.size());
    for (const Vec2& v : o.polygon) {
      inst.polygon.push_back(v + shift);
      inst.center = inst.center + v + shift;
    }
    inst.center = (1.0 / static_cast<double>(inst.polygon.size())) * inst.center;
    for (const Vec2& v : inst.polygon) inst.radius = std::max(inst.radius, norm(v - inst.center));
    out.push_back(std::move(inst));
  }
  return out;
}

Vec2 World::to_world(const geonav::GeoPoint& g) const {
  const geonav::GeoOffset off = geonav::geo_delta(origin, g);
  return {-off.east, off.north};
}

geonav::GeoPoint World::to_geo(Vec2 p) const { return geonav::geo_delta_inverse(origin, -p.x, p.y); }

std::vector<Vec2> World::route_world(std::size_t index) const {
  const auto& r = routes.at(index);
  std::vector<Vec2> out;
  out.reserve(r.size());
  for (const auto& g : r) out.push_back(to_world(g));
  return out;
}

std::vector<Vec2> World::route_path(std::size_t index) const {
  if (index < route_paths.size() && !route_paths[index].empty()) return route_paths[index];
  return route_world(index);
}

double obstacle_clearance(const std::vector<ObstacleInstance>& obstacles, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : obstacles) {
    if (norm(p - o.center) - o.radius >= best) continue;
    best = std::min(best, distance_to_polygon(o.polygon, p));
  }
  return best;
}

}  // namespace lidardrive::simworld
