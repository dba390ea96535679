#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "lidardrive/model/network.hpp"
#include "lidardrive/simworld/episode_log.hpp"
#include "lidardrive/trainer/dataset.hpp"

namespace lidardrive::evalharness {

/// Anything that maps a replayed observation to a prediction.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string name() const = 0;
  virtual model::ModelOutput predict(const trainer::Sample& sample) = 0;
};

class ModelPredictor : public Predictor {
 public:
  ModelPredictor(model::Network& net, std::string name) : net_(net), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  model::ModelOutput predict(const trainer::Sample& sample) override { return net_.predict(sample.input); }

 private:
  model::Network& net_;
  std::string name_;
};

/// Echoes the sample's own labels.
class OraclePredictor : public Predictor {
 public:
  std::string name() const override { return "oracle"; }
  model::ModelOutput predict(const trainer::Sample& sample) override;
};

/// The same output for every observation.
class ConstantPredictor : public Predictor {
 public:
  explicit ConstantPredictor(model::ModelOutput value = {}, std::string name = "zero")
      : value_(value), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  model::ModelOutput predict(const trainer::Sample&) override { return value_; }
  const model::ModelOutput& value() const { return value_; }

 private:
  model::ModelOutput value_;
  std::string name_;
};

/// The constant with the lowest L1 error on `samples`: the per-coordinate
/// median of the labels.
ConstantPredictor fit_constant_predictor(const std::vector<trainer::Sample>& samples,
                                         std::string name = "best-constant");

/// One replayed log.
struct EvalLog {
  std::filesystem::path path;
  simworld::LogMeta meta;
  std::vector<trainer::Sample> samples;
};

struct OfflineOptions {
  trainer::DatasetConfig dataset;  // logged_commands switches off command re-derivation
  bool skip_corrupt = false;       // otherwise a bad log aborts with LogError
};

struct LoadedLogs {
  std::vector<EvalLog> logs;
  std::vector<std::string> warnings;  // one per skipped log
};

LoadedLogs load_eval_logs(const std::vector<std::filesystem::path>& paths, const OfflineOptions& opts);

/// Scores of one repeat: MAEs over every sample of the repeat's logs.
struct RepeatScore {
  int repeat = 0;
  std::size_t samples = 0;
  double mae_wp = 0.0;
  double mae_st = 0.0;
  double mae_th = 0.0;
  double tm = 0.0;  // mae_wp + mae_st + mae_th of this repeat
};

/// One condition x model line: means over repeats and the spread of TM.
struct OfflineRow {
  std::string condition;
  std::string model;
  double mae_wp = 0.0;
  double mae_st = 0.0;
  double mae_th = 0.0;
  double tm = 0.0;
  double tm_std = 0.0;
  std::vector<RepeatScore> repeats;
};

struct OfflineReport {
  std::vector<OfflineRow> rows;
  std::vector<std::string> warnings;
};

/// Replays every sample through the predictor and aggregates per condition
/// (in the order conditions first appear) and per repeat.
OfflineReport offline_eval(Predictor& predictor, const std::vector<EvalLog>& logs);

/// Mean TM over every row, weighting conditions equally.
double overall_tm(const OfflineReport& report);

}  // namespace lidardrive::evalharness
