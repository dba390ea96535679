#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lidardrive/controller/control_policy.hpp"
#include "lidardrive/model/network.hpp"
#include "lidardrive/projection/grid.hpp"
#include "lidardrive/simworld/datagen.hpp"

namespace lidardrive::evalharness {

/// Drives with the network plus the PID/MLP control fusion.
class ModelAgent : public simworld::DrivingAgent {
 public:
  ModelAgent(model::Network& net, const controller::ControllerConfig& ctrl,
             const std::array<double, 3>& loss_weights,
             projection::GridConfig front = projection::GridConfig::front(),
             projection::GridConfig bev = projection::GridConfig::bev());

  void reset() override;
  controller::ControlCommand act(const simworld::Observation& obs) override;

  const controller::ControlPolicy::Decision& last_decision() const { return last_; }
  const model::ModelOutput& last_output() const { return last_output_; }

 private:
  model::Network& net_;
  controller::ControlPolicy policy_;
  projection::GridConfig front_;
  projection::GridConfig bev_;
  controller::ControlPolicy::Decision last_{};
  model::ModelOutput last_output_{};
};

struct OnlineOptions {
  std::vector<simworld::Condition> conditions{simworld::Condition::kLight};
  int repeats = 3;
  std::uint64_t seed = 1;
  std::optional<std::size_t> route;  // all routes when unset
  bool interventions = true;
  std::optional<std::filesystem::path> replay_dir;  // write each episode's log here
};

struct EpisodeScore {
  std::string scene;
  std::size_t route = 0;
  simworld::Condition condition = simworld::Condition::kLight;
  int repeat = 0;
  int interventions = 0;
  double intervention_time = 0.0;
  int collisions = 0;
  bool completed = false;
  double duration = 0.0;
};

/// One condition x model line: per-episode means and standard deviations.
struct OnlineRow {
  std::string condition;
  std::string model;
  double interventions = 0.0;
  double interventions_std = 0.0;
  double time_s = 0.0;
  double time_s_std = 0.0;
  int episodes = 0;
  int completed = 0;
  int collisions = 0;
};

struct OnlineReport {
  std::vector<OnlineRow> rows;
  std::vector<EpisodeScore> episodes;
};

/// Runs every route x condition x repeat of each world. With `agent` null
/// the scripted expert drives.
OnlineReport online_eval(simworld::DrivingAgent* agent, const std::string& model_name,
                         const std::vector<simworld::World>& worlds,
                         const simworld::SimConfig& sim, const OnlineOptions& opts);

/// Mean interventions per episode over every episode of the report.
double mean_interventions(const OnlineReport& report);

}  // namespace lidardrive::evalharness
