#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "lidardrive/controller/control_policy.hpp"
#include "lidardrive/model/config.hpp"
#include "lidardrive/simworld/datagen.hpp"
#include "lidardrive/trainer/trainer.hpp"

namespace lidardrive::evalharness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainSection {
  trainer::TrainConfig config;
  double val_fraction = 0.2;
  int stride = 6;  // keep every stride-th log sample for training and validation
  std::uint64_t model_seed = 1;
};

struct SimSection {
  simworld::SimConfig config;  // lidar lives in its own section
  std::vector<simworld::Condition> conditions{std::begin(simworld::kAllConditions),
                                              std::end(simworld::kAllConditions)};
  int repeats = 1;  // dataset generation repeats per route and condition
};

struct EvalSection {
  std::vector<simworld::Condition> conditions{std::begin(simworld::kAllConditions),
                                              std::end(simworld::kAllConditions)};
  int repeats = 3;
  int stride = 1;
  bool logged_commands = false;
  bool skip_corrupt = false;
  bool interventions = true;
};

/// Everything the command line tool can be configured with. A JSON file may
/// set any subset of the sections {model, train, controller, lidar, sim, eval};
/// missing keys keep their defaults, unknown keys are rejected.
struct AppConfig {
  model::ModelConfig model = model::ModelConfig::desk_default();
  TrainSection train;
  controller::ControllerConfig controller;
  SimSection sim;
  EvalSection eval;

  static AppConfig from_json_text(const std::string& text);
  static AppConfig load(const std::filesystem::path& path);
  std::string to_json_text() const;
};

}  // namespace lidardrive::evalharness
