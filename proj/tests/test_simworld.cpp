#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include "lidardrive/geonav/geo.hpp"
#include "lidardrive/simworld/datagen.hpp"
#include "lidardrive/simworld/episode_log.hpp"
#include "lidardrive/simworld/scene_io.hpp"

using namespace lidardrive;
using namespace lidardrive::simworld;

namespace {

const std::filesystem::path kScenes = std::filesystem::path(LIDARDRIVE_DATA_DIR) / "scenes";

Polygon box(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

World flat_world(std::uint8_t ground = 9) {
  World w;
  w.name = "flat";
  w.origin = {35.0, 139.0};
  w.regions.push_back({ground, box(-500, -500, 500, 500)});
  return w;
}

ObstacleInstance instance(const Polygon& poly, double height, std::uint8_t cls) {
  Obstacle o;
  o.polygon = poly;
  o.height = height;
  o.class_id = cls;
  World w;
  w.obstacles.push_back(o);
  return w.obstacles_at(Condition::kLight, 0.0).at(0);
}

// Independent nearest-hit search: every ray against the ground plane, every
// side face and every top face.
projection::LabeledPointCloud brute_force_scan(const World& world, const std::vector<ObstacleInstance>& obs,
                                               const VehicleState& pose, const LidarConfig& cfg) {
  projection::LabeledPointCloud out;
  const double h = cfg.mount_height;
  const double pi = geonav::kPi;
  for (int a = 0; a < cfg.azimuth_steps; ++a) {
    const double az = (-180.0 + (a + 0.5) * 360.0 / cfg.azimuth_steps) * pi / 180.0;
    for (int r = 0; r < cfg.rings; ++r) {
      const double el = (cfg.elevation_min_deg +
                         (cfg.elevation_max_deg - cfg.elevation_min_deg) * r / std::max(cfg.rings - 1, 1)) *
                        pi / 180.0;
      const double lx = std::cos(el) * std::sin(az), ly = std::cos(el) * std::cos(az), lz = std::sin(el);
      const double c = std::cos(pose.heading), s = std::sin(pose.heading);
      // local (+x left, +y forward) to world
      const double dx = ly * c - lx * s, dy = ly * s + lx * c;
      double best = cfg.max_range;
      int cls = -1;
      if (lz < 0) {
        const double t = h / -lz;
        if (t <= best) {
          best = t;
          cls = world.ground_class_at({pose.position.x + t * dx, pose.position.y + t * dy});
        }
      }
      for (const auto& o : obs) {
        const auto& P = o.polygon;
        for (std::size_t i = 0; i < P.size(); ++i) {
          const Vec2 A = P[i], B = P[(i + 1) % P.size()];
          const Vec2 e = B - A, d{dx, dy}, q = A - pose.position;
          const double den = cross(d, e);
          if (std::abs(den) < 1e-15) continue;
          const double t = cross(q, e) / den, u = cross(q, d) / den;
          if (t <= 0 || u < 0 || u > 1) continue;
          const double z = h + t * lz;
          if (z < 0 || z > o.height) continue;
          if (t < best) best = t, cls = o.class_id;
        }
        if (lz != 0.0) {
          const double t = (o.height - h) / lz;
          if (t > 0 && t < best && point_in_polygon(P, {pose.position.x + t * dx, pose.position.y + t * dy})) {
            best = t;
            cls = o.class_id;
          }
        }
      }
      if (cls < 0) continue;
      out.points.push_back({best * lx, best * ly, best * lz, static_cast<std::uint8_t>(cls)});
    }
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

World one_route(World w, std::size_t index) {
  w.routes = {w.routes.at(index)};
  if (!w.route_paths.empty()) w.route_paths = {w.route_paths.at(index)};
  return w;
}

}  // namespace

// ---- world geometry ----

TEST(World, PolygonHelpers) {
  const Polygon sq = box(0, 0, 2, 2);
  EXPECT_TRUE(point_in_polygon(sq, {1, 1}));
  EXPECT_FALSE(point_in_polygon(sq, {3, 1}));
  EXPECT_DOUBLE_EQ(distance_to_polygon(sq, {3, 1}), 1.0);
  EXPECT_EQ(distance_to_polygon(sq, {1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(signed_area(sq), 4.0);
  EXPECT_TRUE(is_convex(sq));
  EXPECT_FALSE(is_convex({{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}));
}

TEST(World, LaterRegionsPaintOverAndTraversability) {
  World w = flat_world(17);
  w.regions.push_back({9, box(-3, -100, 3, 100)});
  EXPECT_EQ(w.ground_class_at({0, 0}), 9);
  EXPECT_EQ(w.ground_class_at({10, 0}), 17);
  EXPECT_TRUE(w.traversable({0, 0}));
  EXPECT_FALSE(w.traversable({10, 0}));
  World bare;
  EXPECT_EQ(bare.ground_class_at({0, 0}), 12);
}

TEST(World, DensityLevelsAndMovingObstacles) {
  World w = flat_world();
  Obstacle parked{1, box(0, 0, 2, 4), 1.5, 1, {}, 0.0};
  Obstacle walker{6, box(10, 0, 10.5, 0.5), 1.7, 0, {1.0, 0.0}, 8.0};
  w.obstacles = {parked, walker};
  EXPECT_EQ(w.obstacles_at(Condition::kLight, 0).size(), 1u);
  EXPECT_EQ(w.obstacles_at(Condition::kModerate, 0).size(), 2u);
  const auto at2 = w.obstacles_at(Condition::kLight, 2.0).at(0);
  const auto at6 = w.obstacles_at(Condition::kLight, 6.0).at(0);
  const auto at8 = w.obstacles_at(Condition::kLight, 8.0).at(0);
  EXPECT_NEAR(at2.polygon[0].x, 12.0, 1e-12);
  EXPECT_NEAR(at6.polygon[0].x, 12.0, 1e-12);
  EXPECT_NEAR(at8.polygon[0].x, 10.0, 1e-12);
}

TEST(World, GeoRoundTrip) {
  World w = flat_world();
  for (Vec2 p : {Vec2{0, 0}, Vec2{250, -130}, Vec2{-400, 310}}) {
    const Vec2 back = w.to_world(w.to_geo(p));
    EXPECT_NEAR(back.x, p.x, 1e-6);
    EXPECT_NEAR(back.y, p.y, 1e-6);
  }
  // +X is west: moving +X lowers the longitude.
  EXPECT_LT(w.to_geo({100, 0}).lon, w.origin.lon);
  EXPECT_GT(w.to_geo({0, 100}).lat, w.origin.lat);
}

// ---- scenes ----

TEST(Scene, BundledScenesLoadAndRoundTrip) {
  for (const char* name : {"campus_a", "campus_b", "campus_c"}) {
    const World w = load_scene(kScenes / (std::string(name) + ".json"));
    EXPECT_EQ(w.name, name);
    EXPECT_EQ(w.routes.size(), 6u);
    EXPECT_FALSE(w.obstacles.empty());
    for (std::size_t r = 0; r < w.routes.size(); ++r) {
      const auto pts = w.route_world(r);
      for (std::size_t i = 1; i < pts.size(); ++i) {
        EXPECT_NEAR(norm(pts[i] - pts[i - 1]), 12.0, 0.5) << name << " route " << r;
      }
    }
    const World back = parse_scene(scene_to_json(w));
    EXPECT_EQ(back.obstacles.size(), w.obstacles.size());
    EXPECT_EQ(back.routes.size(), w.routes.size());
    EXPECT_EQ(scene_to_json(back), scene_to_json(w));
  }
}

TEST(Scene, SchemaViolationsRejected) {
  const std::string base = R"({"name":"x","origin":{"lat":1,"lon":2},"regions":[],"obstacles":[OBS],"routes":[]})";
  auto with = [&](const std::string& obs) {
    std::string s = base;
    s.replace(s.find("OBS"), 3, obs);
    return s;
  };
  EXPECT_NO_THROW(parse_scene(with(R"({"class":13,"polygon":[[0,0],[1,0],[1,1]],"height":2})")));
  EXPECT_THROW(parse_scene(with(R"({"class":25,"polygon":[[0,0],[1,0],[1,1]],"height":2})")), SceneError);
  EXPECT_THROW(parse_scene(with(R"({"class":13,"polygon":[[0,0],[1,0]],"height":2})")), SceneError);
  EXPECT_THROW(parse_scene(with(R"({"class":13,"polygon":[[0,0],[1,0],[1,1]],"height":0})")), SceneError);
  EXPECT_THROW(parse_scene(with(R"({"class":13,"polygon":[[0,0],[2,0],[1,0.2],[2,2],[0,2]],"height":1})")),
               SceneError);
  EXPECT_THROW(parse_scene("{not json"), SceneError);
  EXPECT_THROW(load_scene(kScenes / "missing.json"), SceneError);
}

// ---- lidar ----

TEST(Lidar, FlatGroundRingAtAnalyticRange) {
  const World w = flat_world(9);
  LidarConfig cfg;
  cfg.rings = 1;
  cfg.elevation_min_deg = cfg.elevation_max_deg = -20.0;
  cfg.azimuth_steps = 90;
  cfg.mount_height = 1.3;
  const auto cloud = raycast_scan(w, {}, VehicleState{{5, 7}, 0.4}, cfg);
  ASSERT_EQ(cloud.points.size(), 90u);
  const double expect = 1.3 / std::sin(geonav::deg_to_rad(20.0));
  for (const auto& p : cloud.points) {
    EXPECT_NEAR(p.range(), expect, 1e-9);
    EXPECT_NEAR(p.z, -1.3, 1e-9);
    EXPECT_EQ(p.class_id, 9);
  }
}

TEST(Lidar, RaysAboveHorizonReturnNothing) {
  LidarConfig cfg;
  cfg.elevation_min_deg = 1.0;
  cfg.elevation_max_deg = 10.0;
  EXPECT_TRUE(raycast_scan(flat_world(), {}, VehicleState{}, cfg).points.empty());
}

TEST(Lidar, WallFiveMetersAhead) {
  const World w = flat_world();
  // Facing north (+Y); the wall spans world x in [-3, 3] at y = 5.
  const VehicleState pose{{0, 0}, geonav::kPi / 2};
  const auto wall = instance(box(-3, 5, 3, 6), 3.0, 13);
  LidarConfig cfg;
  cfg.rings = 3;
  cfg.elevation_min_deg = -10.0;
  cfg.elevation_max_deg = 10.0;
  cfg.azimuth_steps = 720;
  const auto cloud = raycast_scan(w, {wall}, pose, cfg);
  int horizontal_hits = 0;
  for (const auto& p : cloud.points) {
    if (std::abs(p.z) > 1e-12) continue;
    ASSERT_EQ(p.class_id, 13);
    EXPECT_NEAR(p.y, 5.0, 1e-9);
    EXPECT_LE(std::abs(p.x), 3.0 + 1e-9);
    ++horizontal_hits;
  }
  // Columns with |atan(x/5)| < atan(3/5): 2 * 30.96 deg / 0.5 deg.
  EXPECT_NEAR(horizontal_hits, 124, 1);
}

TEST(Lidar, MatchesBruteForceIntersector) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-25.0, 25.0), size(0.3, 4.0), hgt(0.3, 6.0), ang(-3.14, 3.14);
  std::uniform_int_distribution<int> cls(1, 19);
  LidarConfig cfg;
  cfg.azimuth_steps = 180;
  for (int trial = 0; trial < 8; ++trial) {
    World w = flat_world(trial % 2 ? 9 : 11);
    w.regions.push_back({17, box(-10, -60, 0, 60)});
    std::vector<ObstacleInstance> obs;
    while (obs.size() < 25) {
      const double cx = pos(rng), cy = pos(rng), sx = size(rng), sy = size(rng);
      if (std::abs(cx) < sx / 2 + 1 && std::abs(cy) < sy / 2 + 1) continue;  // keep the sensor outside
      const double a = ang(rng), c = std::cos(a), s = std::sin(a);
      Polygon p;
      for (auto [u, v] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) {
        const double x = u * sx / 2, y = v * sy / 2;
        p.push_back({cx + c * x - s * y, cy + s * x + c * y});
      }
      bool inside = point_in_polygon(p, {0, 0}) || distance_to_polygon(p, {0, 0}) < 0.5;
      if (inside) continue;
      obs.push_back(instance(p, hgt(rng), static_cast<std::uint8_t>(cls(rng))));
    }
    const VehicleState pose{{0, 0}, ang(rng)};
    const auto got = raycast_scan(w, obs, pose, cfg);
    const auto want = brute_force_scan(w, obs, pose, cfg);
    ASSERT_EQ(got.points.size(), want.points.size()) << "trial " << trial;
    for (std::size_t i = 0; i < got.points.size(); ++i) {
      ASSERT_EQ(got.points[i].class_id, want.points[i].class_id) << "trial " << trial << " point " << i;
      ASSERT_NEAR(got.points[i].range(), want.points[i].range(), 1e-9);
    }
  }
}

// ---- vehicle ----

TEST(Vehicle, ZeroControlsFromRest) {
  const VehicleState s{{3, 4}, 0.7};
  const auto n = step_vehicle(s, {0.0, 0.0}, 0.25);
  EXPECT_EQ(n.position.x, 3.0);
  EXPECT_EQ(n.position.y, 4.0);
  EXPECT_NEAR(n.heading, 0.7, 1e-15);
  EXPECT_EQ(n.speed, 0.0);
  EXPECT_THROW(step_vehicle(s, {0, 0}, 0.0), std::invalid_argument);
}

TEST(Vehicle, FullThrottleFollowsFirstOrderLag) {
  VehicleState s{{0, 0}, 0.3};
  double t = 0.0;
  for (int k = 0; k < 80; ++k) {
    s = step_vehicle(s, {0.0, 1.0}, 0.25);
    t += 0.25;
    ASSERT_NEAR(s.speed, 1.25 * (1.0 - std::exp(-t / 0.5)), 1e-12);
  }
  EXPECT_NEAR(s.speed, 1.25, 1e-9);
  const double travelled = 1.25 * (t - 0.5 * (1.0 - std::exp(-t / 0.5)));
  EXPECT_NEAR(norm(s.position), travelled, 1e-9);
  EXPECT_NEAR(cross(forward_dir(0.3), s.position), 0.0, 1e-9);
  EXPECT_NEAR(s.omega_left, 1.25 / 0.15, 1e-6);
}

TEST(Vehicle, ConstantTurnTracesCircle) {
  VehicleParams p;
  p.speed_tau = 0.0;
  VehicleState s{{0, 0}, 0.0};
  const controller::ControlCommand cmd{-0.4, 0.8};  // yaw rate +0.4, speed 1.0
  const double radius = 1.0 / 0.4;
  const Vec2 center = s.position + radius * left_dir(s.heading);
  for (int k = 0; k < 60; ++k) {
    s = step_vehicle(s, cmd, 0.25, p);
    ASSERT_NEAR(norm(s.position - center), radius, 1e-9);
  }
  EXPECT_NEAR(s.omega_right - s.omega_left, 0.4 * 0.55 / 0.15, 1e-9);
}

TEST(Vehicle, NoLateralSlipAndSpeedCap) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> st(-1.5, 1.5), th(-0.5, 1.5), dt(0.01, 0.5);
  VehicleState s{{0, 0}, 0.0};
  for (int k = 0; k < 5000; ++k) {
    const auto n = step_vehicle(s, {st(rng), th(rng)}, dt(rng));
    const Vec2 d = n.position - s.position;
    const double mid = s.heading + geonav::wrap_angle(n.heading - s.heading) / 2.0;
    ASSERT_NEAR(cross(forward_dir(mid), d), 0.0, 1e-9);
    ASSERT_GE(dot(forward_dir(mid), d), -1e-12);
    ASSERT_LE(n.speed, 1.25 + 1e-9);
    ASSERT_LE((n.omega_left + n.omega_right) / 2 * 0.15, 1.25 + 1e-9);
    s = n;
  }
}

TEST(Vehicle, LocalFrameConventions) {
  const VehicleState s{{10, 20}, geonav::kPi / 2};  // facing north
  const auto ahead = to_local(s, {10, 25});
  EXPECT_NEAR(ahead.x, 0.0, 1e-12);
  EXPECT_NEAR(ahead.y, 5.0, 1e-12);
  // Local +x is the heading turned a quarter counter-clockwise in world
  // coordinates: -X when facing +Y.
  EXPECT_NEAR(to_local(s, {7, 20}).x, 3.0, 1e-12);
  const Vec2 back = to_world(s, {1.5, -2.0});
  EXPECT_NEAR(back.x, 8.5, 1e-12);
  EXPECT_NEAR(back.y, 18.0, 1e-12);
  EXPECT_NEAR(bearing_of(geonav::kPi / 2), 0.0, 1e-12);
  // Bearings grow counter-clockwise like headings.
  EXPECT_NEAR(bearing_of(0.0), geonav::kPi / 2, 1e-12);
  EXPECT_NEAR(bearing_of(geonav::kPi), -geonav::kPi / 2, 1e-12);
  // The same point seen through the GNSS path.
  const World w = flat_world();
  const auto via_geo = geonav::rotate_to_local(geonav::geo_delta(w.to_geo(s.position), w.to_geo({7, 20})),
                                               bearing_of(s.heading));
  EXPECT_NEAR(via_geo.x, 3.0, 1e-4);
  EXPECT_NEAR(via_geo.y, 0.0, 1e-4);
}

// ---- sensors ----

TEST(Sensors, ZeroNoisePipelineReproducesLocalRoutePoints) {
  const World w = load_scene(kScenes / "campus_b.json");
  std::mt19937_64 rng(7), pick(8);
  std::uniform_real_distribution<double> ang(-3.14, 3.14);
  double worst = 0.0;
  for (std::size_t r = 0; r < w.routes.size(); ++r) {
    const auto pts = w.route_world(r);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const VehicleState s{pts[i] + Vec2{1.3, -0.7}, ang(pick)};
      const auto reading = sense(w, s, NoiseConfig::none(), rng);
      for (std::size_t j = i + 1; j < std::min(pts.size(), i + 3); ++j) {
        const auto off = geonav::geo_delta(reading.fix, w.routes[r][j]);
        const auto local = geonav::rotate_to_local(off, bearing_of(s.heading));
        const auto truth = to_local(s, pts[j]);
        worst = std::max(worst, std::hypot(local.x - truth.x, local.y - truth.y));
      }
    }
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(Sensors, GnssNoiseStatistics) {
  const World w = flat_world();
  NoiseConfig n;
  n.gnss_sigma = 0.3;
  std::mt19937_64 rng(9);
  const VehicleState s{{40, -20}, 1.0};
  double se = 0.0, sn = 0.0, me = 0.0, mn = 0.0;
  std::vector<geonav::GeoOffset> off;
  for (int i = 0; i < 1000; ++i) {
    off.push_back(geonav::geo_delta(w.to_geo(s.position), sense(w, s, n, rng).fix));
    me += off.back().east;
    mn += off.back().north;
  }
  me /= 1000;
  mn /= 1000;
  for (const auto& o : off) se += (o.east - me) * (o.east - me), sn += (o.north - mn) * (o.north - mn);
  EXPECT_NEAR(std::sqrt(se / 999), 0.3, 0.03);
  EXPECT_NEAR(std::sqrt(sn / 999), 0.3, 0.03);
}

TEST(Sensors, StationaryGyroHasZeroMeanAndFieldPointsNorth) {
  const World w = flat_world();
  std::mt19937_64 rng(10);
  const VehicleState s{{0, 0}, geonav::kPi / 2};
  double sum = 0.0;
  for (int i = 0; i < 2000; ++i) sum += sense(w, s, NoiseConfig{}, rng).imu.gyro[2];
  EXPECT_NEAR(sum / 2000, 0.0, 3 * 0.002 / std::sqrt(2000.0));
  const auto clean = sense(w, s, NoiseConfig::none(), rng);
  EXPECT_NEAR(clean.imu.mag[0], 0.0, 1e-12);
  EXPECT_NEAR(clean.imu.mag[1], 1.0, 1e-12);
}

// ---- intervention ----

TEST(Intervention, GeometryCases) {
  World w = flat_world(17);
  w.regions.push_back({9, box(-4, -200, 4, 200)});
  const VehicleState centered{{0, 0}, geonav::kPi / 2, 1.25};
  const InterventionConfig ic;
  EXPECT_FALSE(control_unsafe(w, {}, centered, {0.0, 1.0}, {}, ic));
  const auto wall = instance(box(-4, 1.0, 4, 1.5), 2.0, 13);
  EXPECT_TRUE(control_unsafe(w, {wall}, centered, {0.0, 1.0}, {}, ic));
  // Near the +X edge: a hard clockwise turn (positive steering) leaves the
  // road, the opposite turn heads for the middle.
  const VehicleState edge{{3.2, 0}, geonav::kPi / 2, 1.25};
  EXPECT_TRUE(control_unsafe(w, {}, edge, {1.0, 1.0}, {}, ic));
  EXPECT_FALSE(control_unsafe(w, {}, edge, {-1.0, 1.0}, {}, ic));
}

TEST(Intervention, MonitorBookkeeping) {
  InterventionMonitor m(InterventionConfig{});
  const bool pattern[] = {false, true, false, false, false, false, true, true, false, false, false, false, false};
  double expert_ticks = 0;
  for (bool unsafe : pattern) expert_ticks += m.expert_drives(unsafe, 0.25);
  EXPECT_EQ(m.count(), 2);
  EXPECT_DOUBLE_EQ(m.time(), expert_ticks * 0.25);
  EXPECT_GE(m.time(), 2 * 1.0);
  EXPECT_FALSE(m.active());
}

// ---- expert and episodes ----

TEST(Expert, DeadAheadSteersStraight) {
  ExpertDriver d({{0, 0}, {0, 50}}, ExpertConfig{}, VehicleParams{});
  const auto s = d.start_state();
  EXPECT_NEAR(s.heading, geonav::kPi / 2, 1e-12);
  const auto c = d.act(s, {});
  EXPECT_NEAR(c.steering, 0.0, 1e-12);
  EXPECT_EQ(c.throttle, 1.0);
}

TEST(Expert, TrainingRoutesWithoutInterventions) {
  SimConfig cfg;
  for (const char* name : {"campus_a", "campus_b"}) {
    const World w = load_scene(kScenes / (std::string(name) + ".json"));
    for (std::size_t r = 0; r < w.routes.size(); ++r) {
      EpisodeOptions o;
      o.record = false;
      const auto res = run_episode(w, {r, Condition::kDense, 0, 17 + r}, cfg, nullptr, o);
      EXPECT_TRUE(res.completed) << name << " route " << r;
      EXPECT_EQ(res.interventions, 0) << name << " route " << r;
      EXPECT_EQ(res.collisions, 0) << name << " route " << r;
    }
  }
}

TEST(Expert, LoggedWaypointsMatchFuturePoses) {
  const World w = load_scene(kScenes / "campus_a.json");
  SimConfig cfg;
  const auto res = run_episode(w, {2, Condition::kModerate, 0, 5}, cfg);
  ASSERT_TRUE(res.completed);
  const auto& samples = res.log.samples;
  ASSERT_GT(samples.size(), 20u);
  ASSERT_GE(res.poses.size(), samples.size() + 12);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_NEAR(samples[i].timestamp, 0.25 * i, 1e-9);
    for (int k = 0; k < 3; ++k) {
      const auto want = to_local(res.poses[i], res.poses[i + 4 * (k + 1)].position);
      ASSERT_NEAR(samples[i].waypoints[k].x, want.x, 1e-6);
      ASSERT_NEAR(samples[i].waypoints[k].y, want.y, 1e-6);
    }
    ASSERT_LE(samples[i].command, 2);
    ASSERT_FALSE(samples[i].points.empty());
  }
}

// ---- logs and datasets ----

TEST(EpisodeLog, RoundTripAndValidation) {
  const World w = load_scene(kScenes / "campus_c.json");
  auto res = run_episode(one_route(w, 0), {0, Condition::kLight, 0, 3}, SimConfig{});
  res.log.samples.resize(std::min<std::size_t>(res.log.samples.size(), 12));
  const auto dir = std::filesystem::temp_directory_path() / "lidardrive_log_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "ep.dpl";
  write_log(path, res.log);
  const auto back = read_log(path);
  ASSERT_EQ(back.samples.size(), res.log.samples.size());
  EXPECT_EQ(back.meta.scene, res.log.meta.scene);
  EXPECT_EQ(back.meta.route.size(), res.log.meta.route.size());
  for (std::size_t i = 0; i < back.samples.size(); ++i) {
    const auto q = quantize(res.log.samples[i]);
    const auto& b = back.samples[i];
    EXPECT_EQ(b.timestamp, q.timestamp);
    ASSERT_EQ(b.points.size(), q.points.size());
    EXPECT_EQ(b.points.back().x, q.points.back().x);
    EXPECT_EQ(b.fix.lat, q.fix.lat);
    EXPECT_EQ(b.waypoints[2].y, q.waypoints[2].y);
    EXPECT_EQ(b.command, q.command);
  }

  const std::string bytes = slurp(path);
  { std::ofstream(dir / "trunc.dpl", std::ios::binary) << bytes.substr(0, bytes.size() - 5); }
  std::filesystem::copy_file(log_sidecar_path(path), log_sidecar_path(dir / "trunc.dpl"));
  EXPECT_THROW(read_log(dir / "trunc.dpl"), LogError);
  std::string bad = bytes;
  bad[0] = 'X';
  { std::ofstream(dir / "magic.dpl", std::ios::binary) << bad; }
  std::filesystem::copy_file(log_sidecar_path(path), log_sidecar_path(dir / "magic.dpl"));
  EXPECT_THROW(read_log(dir / "magic.dpl"), LogError);
  std::filesystem::remove(log_sidecar_path(path));
  EXPECT_THROW(read_log(path), LogError);
  std::filesystem::remove_all(dir);
}

TEST(Dataset, SeedDeterministicByteIdenticalLogs) {
  const World w = one_route(load_scene(kScenes / "campus_a.json"), 1);
  const auto base = std::filesystem::temp_directory_path() / "lidardrive_dataset_test";
  std::filesystem::remove_all(base);
  const std::vector<Condition> conds{Condition::kLight, Condition::kDense};
  const auto a = generate_dataset({w}, conds, 1, 42, base / "a", SimConfig{});
  const auto b = generate_dataset({w}, conds, 1, 42, base / "b", SimConfig{});
  ASSERT_EQ(a.size(), 2u);
  ASSERT_EQ(b.size(), 2u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].filename(), b[i].filename());
    EXPECT_EQ(slurp(a[i]), slurp(b[i]));
    EXPECT_EQ(slurp(log_sidecar_path(a[i])), slurp(log_sidecar_path(b[i])));
    const auto log = read_log(a[i]);
    for (std::size_t k = 1; k < log.samples.size(); ++k) {
      ASSERT_NEAR(log.samples[k].timestamp - log.samples[k - 1].timestamp, 0.25, 1e-12);
    }
  }
  const auto c = generate_dataset({w}, {Condition::kLight}, 1, 43, base / "c", SimConfig{});
  EXPECT_NE(slurp(c[0]), slurp(a[0]));
  std::filesystem::remove_all(base);
}
