#include "lidardrive/trainer/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "lidardrive/simworld/datagen.hpp"

namespace lidardrive::trainer {

std::vector<Sample> samples_from_log(const simworld::EpisodeLog& log, const DatasetConfig& cfg,
                                     std::size_t log_index) {
  if (cfg.stride < 1) throw std::invalid_argument("dataset stride must be >= 1");
  simworld::Navigator nav(log.meta.route, cfg.heading, log.meta.dt);
  std::vector<Sample> out;
  out.reserve(log.samples.size() / static_cast<std::size_t>(cfg.stride) + 1);
  for (std::size_t i = 0; i < log.samples.size(); ++i) {
    const simworld::LogSample& s = log.samples[i];
    const auto guidance = nav.update(s.fix, s.imu);
    if (i % static_cast<std::size_t>(cfg.stride) != 0) continue;

    Sample sample;
    sample.log_index = log_index;
    sample.sample_index = i;
    const projection::LabeledPointCloud cloud{s.points, s.timestamp};
    sample.input.front = projection::project(cloud, cfg.front);
    sample.input.bev = projection::project(cloud, cfg.bev);
    sample.input.rp1 = guidance.view.rp1;
    sample.input.rp2 = guidance.view.rp2;
    sample.input.omega_left = s.omega_left;
    sample.input.omega_right = s.omega_right;
    sample.input.command = cfg.logged_commands ? static_cast<int>(s.command)
                                               : static_cast<int>(guidance.command);
    sample.target.waypoints = s.waypoints;
    sample.target.steering = s.steering;
    sample.target.throttle = s.throttle;
    out.push_back(std::move(sample));
  }
  return out;
}

Dataset load_dataset(const std::vector<std::filesystem::path>& logs, const DatasetConfig& cfg) {
  Dataset d;
  d.logs = logs;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    auto part = samples_from_log(simworld::read_log(logs[i]), cfg, i);
    std::move(part.begin(), part.end(), std::back_inserter(d.samples));
  }
  return d;
}

std::vector<std::filesystem::path> find_logs(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".dpl") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

LogSplit split_logs(std::vector<std::filesystem::path> logs, double val_fraction, std::uint64_t seed) {
  if (val_fraction < 0.0 || val_fraction >= 1.0) {
    throw std::invalid_argument("validation fraction must be in [0, 1)");
  }
  std::sort(logs.begin(), logs.end());
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the order does not depend on the
  // standard library's shuffle.
  for (std::size_t i = logs.size(); i > 1; --i) {
    std::swap(logs[i - 1], logs[rng() % i]);
  }
  std::size_t n_val = static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(logs.size())));
  if (val_fraction > 0.0 && n_val == 0 && logs.size() > 1) n_val = 1;
  LogSplit split;
  split.val.assign(logs.begin(), logs.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.train.assign(logs.begin() + static_cast<std::ptrdiff_t>(n_val), logs.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

}  // namespace lidardrive::trainer
