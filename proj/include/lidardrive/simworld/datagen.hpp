#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lidardrive/controller/control_policy.hpp"
#include "lidardrive/geonav/heading_filter.hpp"
#include "lidardrive/geonav/route_tracker.hpp"
#include "lidardrive/simworld/episode_log.hpp"
#include "lidardrive/simworld/expert.hpp"
#include "lidardrive/simworld/intervention.hpp"
#include "lidardrive/simworld/lidar.hpp"
#include "lidardrive/simworld/sensors.hpp"

namespace lidardrive::simworld {

struct SimConfig {
  double dt = 0.25;  // s, the 4 Hz log rate
  VehicleParams vehicle;
  LidarConfig lidar;
  NoiseConfig noise;
  ExpertConfig expert;
  InterventionConfig intervention;
  geonav::HeadingFilterConfig heading;
  double timeout_factor = 3.0;   // policy time limit relative to the expert's
  double waypoint_horizon = 3.0; // s of future trajectory kept after the finish
};

/// GNSS/IMU to route guidance: heading filter, route tracker and the
/// command rule. Used identically online and when replaying logs.
class Navigator {
 public:
  Navigator(std::vector<geonav::GeoPoint> route, const geonav::HeadingFilterConfig& cfg, double dt);

  struct Output {
    double bearing = 0.0;
    geonav::RouteView view;
    controller::Command command = controller::Command::kStraight;
  };

  /// The first call seeds the filter from the reading; later calls advance it by dt.
  Output update(const geonav::GeoPoint& fix, const geonav::ImuSample& imu);

 private:
  geonav::RouteTracker tracker_;
  geonav::HeadingFilterConfig cfg_;
  double dt_;
  std::optional<geonav::HeadingFilterState> filter_;
};

/// Everything a driving policy may look at in one tick.
struct Observation {
  double time = 0.0;
  const projection::LabeledPointCloud* cloud = nullptr;
  SensorReading sensors;
  Navigator::Output nav;
};

class DrivingAgent {
 public:
  virtual ~DrivingAgent() = default;
  virtual void reset() {}
  virtual controller::ControlCommand act(const Observation& obs) = 0;
};

struct EpisodeSpec {
  std::size_t route_index = 0;
  Condition condition = Condition::kLight;
  int repeat = 0;
  std::uint64_t seed = 0;
};

struct EpisodeOptions {
  bool record = true;            // keep log samples (with point clouds)
  std::optional<double> time_limit;  // s; defaults to timeout_factor x expert time for agents
  bool interventions = true;         // false lets the agent drive without the safety monitor
};

struct EpisodeResult {
  EpisodeLog log;
  std::vector<VehicleState> poses;  // one per tick, then the stopping tail
  int interventions = 0;
  double intervention_time = 0.0;
  int collisions = 0;
  bool completed = false;
  double duration = 0.0;
  double time_limit = 0.0;
  double min_clearance = 0.0;
  int offroad_ticks = 0;
};

/// Runs one closed-loop episode at dt. With `agent` null the scripted
/// expert drives (and the monitor still judges it); otherwise the agent
/// proposes controls and the monitor hands over to the expert when needed.
EpisodeResult run_episode(const World& world, const EpisodeSpec& spec, const SimConfig& cfg,
                          DrivingAgent* agent = nullptr, const EpisodeOptions& opts = {});

/// Time the expert needs to finish the route, without sensing or logging.
double expert_duration(const World& world, const EpisodeSpec& spec, const SimConfig& cfg);

/// Deterministic per-episode seed.
std::uint64_t episode_seed(std::uint64_t base, const std::string& scene, std::size_t route,
                           Condition condition, int repeat);

/// Runs the expert over every route x condition x repeat and writes one log
/// per episode into out_dir. Returns the log paths in generation order.
std::vector<std::filesystem::path> generate_dataset(const std::vector<World>& worlds,
                                                    const std::vector<Condition>& conditions,
                                                    int repeats, std::uint64_t seed,
                                                    const std::filesystem::path& out_dir,
                                                    const SimConfig& cfg);

std::string log_file_name(const std::string& scene, std::size_t route, Condition c, int repeat);

}  // namespace lidardrive::simworld
