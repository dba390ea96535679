#include "lidardrive/simworld/datagen.hpp"

#include <cmath>
#include <random>

namespace lidardrive::simworld {

Navigator::Navigator(std::vector<geonav::GeoPoint> route, const geonav::HeadingFilterConfig& cfg, double dt)
    : tracker_(std::move(route)), cfg_(cfg), dt_(dt) {}

Navigator::Output Navigator::update(const geonav::GeoPoint& fix, const geonav::ImuSample& imu) {
  filter_ = filter_ ? geonav::heading_update(*filter_, imu, dt_, cfg_) : geonav::heading_init(imu, cfg_);
  Output out;
  out.bearing = filter_->bearing;
  out.view = tracker_.update(fix, out.bearing);
  out.command = controller::derive_command(out.view.rp1, out.view.rp2);
  return out;
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double default_limit(const ExpertDriver& e) { return 60.0 + 10.0 * e.length(); }

}  // namespace

std::uint64_t episode_seed(std::uint64_t base, const std::string& scene, std::size_t route,
                           Condition condition, int repeat) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the scene name
  for (unsigned char c : scene) h = (h ^ c) * 1099511628211ULL;
  std::uint64_t s = splitmix(base ^ h);
  s = splitmix(s ^ route);
  s = splitmix(s ^ static_cast<std::uint64_t>(condition));
  return splitmix(s ^ static_cast<std::uint64_t>(repeat));
}

std::string log_file_name(const std::string& scene, std::size_t route, Condition c, int repeat) {
  return scene + "_route" + std::to_string(route) + "_" + condition_name(c) + "_rep" +
         std::to_string(repeat) + ".dpl";
}

double expert_duration(const World& world, const EpisodeSpec& spec, const SimConfig& cfg) {
  ExpertDriver expert(world.route_path(spec.route_index), cfg.expert, cfg.vehicle);
  VehicleState state = expert.start_state();
  const double limit = default_limit(expert);
  int tick = 0;
  while (!expert.finished(state) && tick * cfg.dt < limit) {
    const auto obstacles = world.obstacles_at(spec.condition, tick * cfg.dt);
    state = step_vehicle(state, expert.act(state, obstacles), cfg.dt, cfg.vehicle);
    ++tick;
  }
  return tick * cfg.dt;
}

EpisodeResult run_episode(const World& world, const EpisodeSpec& spec, const SimConfig& cfg,
                          DrivingAgent* agent, const EpisodeOptions& opts) {
  if (spec.route_index >= world.routes.size()) {
    throw std::out_of_range("run_episode: route " + std::to_string(spec.route_index) + " not in scene " + world.name);
  }
  ExpertDriver expert(world.route_path(spec.route_index), cfg.expert, cfg.vehicle);
  VehicleState state = expert.start_state();
  std::mt19937_64 rng(spec.seed);
  Navigator nav(world.routes[spec.route_index], cfg.heading, cfg.dt);
  InterventionMonitor monitor(cfg.intervention);
  if (agent) agent->reset();

  EpisodeResult res;
  if (opts.time_limit) res.time_limit = *opts.time_limit;
  else if (agent) res.time_limit = cfg.timeout_factor * expert_duration(world, spec, cfg);
  else res.time_limit = default_limit(expert);

  LogMeta& meta = res.log.meta;
  meta.scene = world.name;
  meta.route_index = static_cast<int>(spec.route_index);
  meta.condition = spec.condition;
  meta.repeat = spec.repeat;
  meta.seed = spec.seed;
  meta.route = world.routes[spec.route_index];
  meta.origin = world.origin;
  meta.dt = cfg.dt;
  meta.driver = agent ? "policy" : "expert";

  res.min_clearance = INFINITY;
  bool touching = false;
  int tick = 0;
  for (;; ++tick) {
    const double t = tick * cfg.dt;
    if (expert.finished(state)) {
      res.completed = true;
      break;
    }
    if (t >= res.time_limit - 1e-9) break;

    const auto obstacles = world.obstacles_at(spec.condition, t);
    const SensorReading reading = sense(world, state, cfg.noise, rng);
    projection::LabeledPointCloud cloud;
    if (opts.record || agent) cloud = raycast_scan(world, obstacles, state, cfg.lidar);
    cloud.timestamp = t;
    const Navigator::Output guidance = nav.update(reading.fix, reading.imu);

    const controller::ControlCommand expert_cmd = expert.act(state, obstacles);
    controller::ControlCommand proposal = expert_cmd;
    if (agent) proposal = agent->act(Observation{t, &cloud, reading, guidance});
    const bool unsafe = control_unsafe(world, obstacles, state, proposal, cfg.vehicle, cfg.intervention);
    const bool takeover = opts.interventions && monitor.expert_drives(unsafe, cfg.dt);
    const controller::ControlCommand cmd = (agent && !takeover) ? proposal : expert_cmd;

    if (opts.record) {
      LogSample s;
      s.timestamp = t;
      s.points = std::move(cloud.points);
      s.fix = reading.fix;
      s.imu = reading.imu;
      s.omega_left = reading.omega_left;
      s.omega_right = reading.omega_right;
      s.steering = cmd.steering;
      s.throttle = cmd.throttle;
      s.command = static_cast<std::uint8_t>(guidance.command);
      res.log.samples.push_back(std::move(s));
    }
    res.poses.push_back(state);

    const double clearance = obstacle_clearance(obstacles, state.position);
    res.min_clearance = std::min(res.min_clearance, clearance);
    const bool now_touching = clearance < cfg.intervention.clearance;
    if (now_touching && !touching) ++res.collisions;
    touching = now_touching;
    if (!world.traversable(state.position)) ++res.offroad_ticks;

    state = step_vehicle(state, cmd, cfg.dt, cfg.vehicle);
  }
  res.duration = tick * cfg.dt;
  res.interventions = monitor.count();
  res.intervention_time = monitor.time();

  // Stopping tail so every sample has a full future trajectory.
  const int per_second = static_cast<int>(std::lround(1.0 / cfg.dt));
  const int tail = static_cast<int>(std::lround(cfg.waypoint_horizon / cfg.dt));
  res.poses.push_back(state);
  for (int k = 0; k < tail; ++k) {
    state = step_vehicle(state, expert.stop(state), cfg.dt, cfg.vehicle);
    res.poses.push_back(state);
  }
  for (std::size_t i = 0; i < res.log.samples.size(); ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      const VehicleState& future = res.poses[i + (k + 1) * static_cast<std::size_t>(per_second)];
      res.log.samples[i].waypoints[k] = to_local(res.poses[i], future.position);
    }
  }
  return res;
}

std::vector<std::filesystem::path> generate_dataset(const std::vector<World>& worlds,
                                                    const std::vector<Condition>& conditions,
                                                    int repeats, std::uint64_t seed,
                                                    const std::filesystem::path& out_dir,
                                                    const SimConfig& cfg) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> paths;
  for (const World& w : worlds) {
    for (std::size_t r = 0; r < w.routes.size(); ++r) {
      for (Condition c : conditions) {
        for (int rep = 0; rep < repeats; ++rep) {
          EpisodeSpec spec{r, c, rep, episode_seed(seed, w.name, r, c, rep)};
          const EpisodeResult res = run_episode(w, spec, cfg);
          const auto path = out_dir / log_file_name(w.name, r, c, rep);
          write_log(path, res.log);
          paths.push_back(path);
        }
      }
    }
  }
  return paths;
}

}  // namespace lidardrive::simworld
