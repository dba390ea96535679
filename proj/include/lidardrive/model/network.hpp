#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "lidardrive/geonav/geo.hpp"
#include "lidardrive/model/config.hpp"
#include "lidardrive/projection/grid.hpp"
#include "lidardrive/tensorgrad/ops.hpp"

namespace lidardrive::model {

using geonav::LocalPoint;
using tensorgrad::Tape;
using tensorgrad::Var;

struct ObservationInput {
  projection::ProjectedGrid front;
  projection::ProjectedGrid bev;
  LocalPoint rp1;
  LocalPoint rp2;
  double omega_left = 0.0;   // rad/s
  double omega_right = 0.0;  // rad/s
  int command = 0;           // 0 straight, 1 left, 2 right
};

struct ModelOutput {
  std::array<LocalPoint, 3> waypoints{};
  double steering = 0.0;  // [-1, 1]
  double throttle = 0.0;  // [0, 1]
};

/// Handles to the recorded outputs of one forward pass.
struct ForwardTrace {
  Var waypoints;  // [6]: x1, y1, x2, y2, x3, y3
  std::array<Var, 3> deltas;  // [2] each, before accumulation
  Var steering;   // [1]
  Var throttle;   // [1]
  Var latent;     // [latent_size]
  /// Tape id of the last shared layer's output. Running backward with
  /// stop_before = this id reaches only that layer's parameters.
  std::size_t shared_layer_node = 0;
};

struct DecodeResult {
  Var hidden;
  Var delta;  // [2]
};

/// The full perception-to-control network. Parameters are created only for
/// enabled branches; a disabled branch contributes zero features.
class Network {
 public:
  Network(ModelConfig cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  tensorgrad::ParameterSet& params() { return params_; }
  const tensorgrad::ParameterSet& params() const { return params_; }

  /// Parameters of the last layer shared by every task (fusion dense layer).
  std::vector<tensorgrad::Parameter*> shared_parameters();

  Var encode(Tape& t, const projection::ProjectedGrid& grid, projection::GridMode which);
  Var fuse(Tape& t, Var front_features, Var bev_features);
  DecodeResult decode_step(Tape& t, Var hidden, Var wp_prev, const LocalPoint& rp1,
                           const LocalPoint& rp2, double omega_left, double omega_right);
  /// Steering (tanh) and throttle (sigmoid) from the command's MLP. Throws
  /// std::invalid_argument on a bad command index.
  std::pair<Var, Var> control_heads(Tape& t, Var hidden, int command);

  ForwardTrace forward(Tape& t, const ObservationInput& obs);
  /// Inference without gradient bookkeeping.
  ModelOutput predict(const ObservationInput& obs);

  static ModelOutput read_output(const Tape& t, const ForwardTrace& trace);

 private:
  struct ConvParams {
    std::vector<tensorgrad::Parameter*> weights;  // one per dilation
    std::vector<tensorgrad::Parameter*> biases;
  };
  struct Mlp {
    std::vector<tensorgrad::Parameter*> weights;
    std::vector<tensorgrad::Parameter*> biases;
  };

  void build(std::uint64_t seed);
  Var zero_features(Tape& t) const;
  Var run_encoder(Tape& t, const projection::ProjectedGrid& grid, const EncoderConfig& ec,
                  const std::vector<ConvParams>& stages);

  ModelConfig cfg_;
  tensorgrad::ParameterSet params_;
  std::vector<ConvParams> front_stages_;
  std::vector<ConvParams> bev_stages_;
  tensorgrad::Parameter* fusion_pw_w_ = nullptr;
  tensorgrad::Parameter* fusion_pw_b_ = nullptr;
  tensorgrad::Parameter* fusion_dense_w_ = nullptr;
  tensorgrad::Parameter* fusion_dense_b_ = nullptr;
  std::array<tensorgrad::Parameter*, 9> gru_{};
  tensorgrad::Parameter* dx_w_ = nullptr;
  tensorgrad::Parameter* dx_b_ = nullptr;
  tensorgrad::Parameter* dy_w_ = nullptr;
  tensorgrad::Parameter* dy_b_ = nullptr;
  std::vector<Mlp> mlps_;
};

/// A checkpoint plus the loss weights stored beside it.
struct LoadedModel {
  std::unique_ptr<Network> network;
  std::array<double, 3> loss_weights{1.0, 1.0, 1.0};
};

/// Writes the parameter file at `path` and "<path>.json" holding the model
/// config and loss weights.
void save_model(const std::filesystem::path& path, const Network& net,
                const std::array<double, 3>& loss_weights);
LoadedModel load_model(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);

}  // namespace lidardrive::model
