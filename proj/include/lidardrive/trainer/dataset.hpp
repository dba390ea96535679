#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "lidardrive/geonav/heading_filter.hpp"
#include "lidardrive/model/network.hpp"
#include "lidardrive/projection/grid.hpp"
#include "lidardrive/simworld/episode_log.hpp"
#include "lidardrive/trainer/loss.hpp"

namespace lidardrive::trainer {

struct DatasetConfig {
  int stride = 1;  // keep every stride-th sample of each log
  projection::GridConfig front = projection::GridConfig::front();
  projection::GridConfig bev = projection::GridConfig::bev();
  geonav::HeadingFilterConfig heading;
  /// Use the command stored in the log instead of re-deriving it from the
  /// route points seen during replay.
  bool logged_commands = false;
};

/// A model-ready observation with its expert labels.
struct Sample {
  model::ObservationInput input;
  Target target;
  std::size_t log_index = 0;     // position in the list of logs given to the loader
  std::size_t sample_index = 0;  // position inside that log
};

/// Replays a log through the navigator (heading filter, route tracker,
/// command rule) and the projections. Every sample drives the navigator;
/// only every stride-th one is kept.
std::vector<Sample> samples_from_log(const simworld::EpisodeLog& log, const DatasetConfig& cfg,
                                     std::size_t log_index = 0);

struct Dataset {
  std::vector<std::filesystem::path> logs;
  std::vector<Sample> samples;
};

Dataset load_dataset(const std::vector<std::filesystem::path>& logs, const DatasetConfig& cfg);

/// Every "*.dpl" file under dir, sorted by name.
std::vector<std::filesystem::path> find_logs(const std::filesystem::path& dir);

/// Splits whole logs into train and validation: a seeded shuffle of the log
/// list, the first round(fraction * n) logs (at least one when the fraction
/// is positive and n > 1) go to validation.
struct LogSplit {
  std::vector<std::filesystem::path> train;
  std::vector<std::filesystem::path> val;
};
LogSplit split_logs(std::vector<std::filesystem::path> logs, double val_fraction,
                    std::uint64_t seed);

}  // namespace lidardrive::trainer
