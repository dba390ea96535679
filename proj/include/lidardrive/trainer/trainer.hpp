#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lidardrive/model/network.hpp"
#include "lidardrive/tensorgrad/optimizer.hpp"
#include "lidardrive/trainer/dataset.hpp"
#include "lidardrive/trainer/loss.hpp"
#include "lidardrive/trainer/mgn.hpp"
#include "lidardrive/trainer/schedule.hpp"

namespace lidardrive::trainer {

struct TrainConfig {
  int batch_size = 10;
  double lr = 1e-4;
  double weight_decay = 1e-3;
  PlateauConfig plateau;
  int max_epochs = 60;
  std::uint64_t seed = 1;
  MgnConfig mgn;
  LossWeights initial_alpha{1.0, 1.0, 1.0};
  std::filesystem::path out_dir = "run";
  std::string run_name = "model";
  bool verbose = false;  // one line per epoch on stderr
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double lr = 0.0;  // rate used during the epoch
  LossWeights alpha{};  // weights at the end of the epoch
  TaskLosses train;
  double train_loss = 0.0;  // mean weighted loss over the epoch's batches
  TaskLosses val;
  double val_loss = 0.0;    // weighted by the initial alpha
  bool improved = false;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> curve;
  std::filesystem::path checkpoint;  // best validation epoch
  std::filesystem::path run_log;     // JSON lines
  std::filesystem::path curve_csv;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  LossWeights best_alpha{1.0, 1.0, 1.0};
  LossWeights final_alpha{1.0, 1.0, 1.0};
  bool early_stopped = false;
};

/// Mean per-task absolute errors of the network over `samples`.
TaskLosses evaluate_split(model::Network& net, const std::vector<Sample>& samples);

/// Unweighted task-gradient norms on the network's shared layer for one
/// batch, averaged over the batch like the training gradient.
std::array<double, 3> shared_gradient_norms(model::Network& net, const std::vector<const Sample*>& batch);

/// Behavior cloning with AdamW, MGN loss weights and the plateau schedule.
/// Writes <out_dir>/<run_name>.ckpt (+ sidecar) whenever validation improves,
/// appends to <run_name>.jsonl and exports <run_name>_curve.csv. On return
/// the network holds the best epoch's parameters. A non-finite loss aborts
/// with TrainingError after writing <run_name>_nan_dump.json.
TrainResult train(model::Network& net, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const TrainConfig& cfg);

}  // namespace lidardrive::trainer
