#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lidardrive/geonav/geo.hpp"

namespace lidardrive::simworld {

/// World-frame coordinates in meters. The world is tied to the earth as a
/// mirror image: +X points west and +Y north, so east = -X.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a);

using Polygon = std::vector<Vec2>;

/// Even-odd rule; points on an edge may land either way.
bool point_in_polygon(const Polygon& poly, Vec2 p);
/// Zero inside, otherwise distance to the nearest edge.
double distance_to_polygon(const Polygon& poly, Vec2 p);
double signed_area(const Polygon& poly);
bool is_convex(const Polygon& poly);

/// Traffic density of a run. An obstacle appears when the condition is at
/// least its density level.
enum class Condition : int { kLight = 0, kModerate = 1, kDense = 2 };
const char* condition_name(Condition c);
Condition parse_condition(const std::string& s);
inline constexpr Condition kAllConditions[] = {Condition::kLight, Condition::kModerate,
                                               Condition::kDense};

struct Region {
  std::uint8_t class_id = 9;
  Polygon polygon;
};

/// A convex prism from the ground up to `height`. A non-zero `velocity`
/// moves it back and forth: it travels for half of `period`, then returns.
struct Obstacle {
  std::uint8_t class_id = 13;
  Polygon polygon;
  double height = 1.0;
  int density_level = 0;
  Vec2 velocity;
  double period = 0.0;
};

/// An obstacle placed at a given time.
struct ObstacleInstance {
  std::uint8_t class_id = 0;
  Polygon polygon;
  double height = 0.0;
  // Bounding circle for broad-phase tests.
  Vec2 center;
  double radius = 0.0;
};

struct World {
  std::string name;
  geonav::GeoPoint origin;
  std::uint8_t default_class = 12;
  std::vector<Region> regions;  // later regions paint over earlier ones
  std::vector<Obstacle> obstacles;
  std::vector<std::vector<geonav::GeoPoint>> routes;
  /// Optional dense centerline per route (world meters) for the scripted
  /// driver; when empty the route points themselves are used.
  std::vector<std::vector<Vec2>> route_paths;

  std::uint8_t ground_class_at(Vec2 p) const;
  /// Road, parking lot or sidewalk.
  bool traversable(Vec2 p) const;

  std::vector<ObstacleInstance> obstacles_at(Condition c, double time) const;

  Vec2 to_world(const geonav::GeoPoint& g) const;
  geonav::GeoPoint to_geo(Vec2 p) const;

  std::vector<Vec2> route_world(std::size_t index) const;
  /// The centerline the scripted driver follows for a route.
  std::vector<Vec2> route_path(std::size_t index) const;
};

bool is_traversable_class(std::uint8_t class_id);

/// Smallest distance from `p` to any obstacle (infinity when none).
double obstacle_clearance(const std::vector<ObstacleInstance>& obstacles, Vec2 p);

}  // namespace lidardrive::simworld
