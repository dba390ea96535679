#include "lidardrive/model/network.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "lidardrive/tensorgrad/checkpoint.hpp"

namespace lidardrive::model {

namespace tg = tensorgrad;
using projection::GridMode;
using projection::ProjectedGrid;

namespace {

void init_uniform(tg::Parameter& p, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : p.value.data()) v = dist(rng);
}

tg::SparseInput sparse_input(const ProjectedGrid& grid, ChannelMode mode) {
  tg::SparseInput in;
  in.height = static_cast<std::size_t>(grid.height());
  in.width = static_cast<std::size_t>(grid.width());
  in.channels = mode == ChannelMode::kSegDepth ? 21 : (mode == ChannelMode::kSeg ? 20 : 1);
  const auto w = static_cast<std::uint32_t>(grid.width());
  for (const auto& c : grid.cells()) {
    const std::uint32_t row = c.index / w, col = c.index % w;
    if (mode != ChannelMode::kDepth) in.entries.push_back({c.class_id, row, col, 1.0});
    if (mode != ChannelMode::kSeg) {
      const std::uint32_t ch = mode == ChannelMode::kDepth ? 0 : projection::kDepthChannel;
      in.entries.push_back({ch, row, col, c.log_depth});
    }
  }
  return in;
}

}  // namespace

Network::Network(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  build(seed);
}

void Network::build(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases alike.
  auto make = [&](const std::string& name, tg::Shape shape, std::size_t fan_in) {
    tg::Parameter& p = params_.add(name, std::move(shape));
    init_uniform(p, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
    return &p;
  };

  auto build_encoder = [&](const EncoderConfig& ec, const std::string& prefix) {
    std::vector<ConvParams> stages;
    std::size_t in_ch = static_cast<std::size_t>(cfg_.input_channels());
    for (std::size_t s = 0; s < ec.stages.size(); ++s) {
      const auto& st = ec.stages[s];
      const std::size_t k = static_cast<std::size_t>(st.kernel);
      const std::size_t per = static_cast<std::size_t>(st.channels) / st.dilations.size();
      ConvParams cp;
      for (std::size_t d = 0; d < st.dilations.size(); ++d) {
        const std::string base = prefix + ".s" + std::to_string(s) + ".d" + std::to_string(d);
        cp.weights.push_back(make(base + ".w", {per, in_ch, k, k}, in_ch * k * k));
        cp.biases.push_back(make(base + ".b", {per}, in_ch * k * k));
      }
      stages.push_back(std::move(cp));
      in_ch = static_cast<std::size_t>(st.channels);
    }
    return stages;
  };
  if (cfg_.use_front) front_stages_ = build_encoder(cfg_.front, "front");
  if (cfg_.use_bev) bev_stages_ = build_encoder(cfg_.bev, "bev");

  const auto feat = cfg_.front.output_shape();
  const std::size_t c2 = 2 * static_cast<std::size_t>(feat[0]);
  const std::size_t fc = static_cast<std::size_t>(cfg_.fusion_channels);
  const std::size_t hid = static_cast<std::size_t>(cfg_.latent_size);
  const std::size_t gin = ModelConfig::kGruInputSize;
  fusion_pw_w_ = make("fusion.pointwise.w", {fc, c2}, c2);
  fusion_pw_b_ = make("fusion.pointwise.b", {fc}, c2);
  fusion_dense_w_ = make("fusion.dense.w", {hid, fc}, fc);
  fusion_dense_b_ = make("fusion.dense.b", {hid}, fc);

  const char* gates[3] = {"z", "r", "n"};
  for (int g = 0; g < 3; ++g) {
    const std::string n = gates[g];
    gru_[3 * g + 0] = make("gru.w_" + n, {hid, gin}, hid);
    gru_[3 * g + 1] = make("gru.u_" + n, {hid, hid}, hid);
    gru_[3 * g + 2] = make("gru.b_" + n, {hid}, hid);
  }
  dx_w_ = make("waypoint.dx.w", {1, hid}, hid);
  dx_b_ = make("waypoint.dx.b", {1}, hid);
  dy_w_ = make("waypoint.dy.w", {1, hid}, hid);
  dy_b_ = make("waypoint.dy.b", {1}, hid);

  for (int c = 0; c < cfg_.num_commands; ++c) {
    Mlp m;
    std::size_t in = hid;
    const std::string base = "control.cmd" + std::to_string(c);
    for (std::size_t l = 0; l < cfg_.mlp_hidden.size(); ++l) {
      const std::size_t out = static_cast<std::size_t>(cfg_.mlp_hidden[l]);
      m.weights.push_back(make(base + ".l" + std::to_string(l) + ".w", {out, in}, in));
      m.biases.push_back(make(base + ".l" + std::to_string(l) + ".b", {out}, in));
      in = out;
    }
    m.weights.push_back(make(base + ".out.w", {2, in}, in));
    m.biases.push_back(make(base + ".out.b", {2}, in));
    mlps_.push_back(std::move(m));
  }
  params_.zero_grads();
}

std::vector<tg::Parameter*> Network::shared_parameters() { return {fusion_dense_w_, fusion_dense_b_}; }

Var Network::zero_features(Tape& t) const {
  const auto s = cfg_.front.output_shape();
  return t.constant(tg::Tensor({static_cast<std::size_t>(s[0]), static_cast<std::size_t>(s[1]),
                                static_cast<std::size_t>(s[2])}));
}

Var Network::run_encoder(Tape& t, const ProjectedGrid& grid, const EncoderConfig& ec,
                         const std::vector<ConvParams>& stages) {
  if (grid.height() != ec.height || grid.width() != ec.width) {
    throw tg::ShapeError("encoder expects a " + std::to_string(ec.height) + "x" +
                         std::to_string(ec.width) + " grid, got " + std::to_string(grid.height()) +
                         "x" + std::to_string(grid.width()));
  }
  const tg::SparseInput sparse = sparse_input(grid, cfg_.channel_mode);
  Var x;
  if (cfg_.standardize_input) x = tg::channel_standardize(t, t.constant(sparse.to_dense()));

  for (std::size_t s = 0; s < ec.stages.size(); ++s) {
    const auto& st = ec.stages[s];
    std::vector<Var> branches;
    for (std::size_t d = 0; d < st.dilations.size(); ++d) {
      const auto p = tg::Conv2dParams::same(static_cast<std::size_t>(st.kernel),
                                            static_cast<std::size_t>(st.dilations[d]));
      const Var w = t.param(*stages[s].weights[d]);
      const Var b = t.param(*stages[s].biases[d]);
      branches.push_back(s == 0 && !x.valid() ? tg::sparse_conv2d(t, sparse, w, b, p)
                                              : tg::conv2d(t, x, w, b, p));
    }
    x = branches.size() == 1 ? branches.front() : tg::concat(t, branches);
    x = tg::relu(t, x);
    if (st.pool_h > 1 || st.pool_w > 1) {
      const auto ph = static_cast<std::size_t>(st.pool_h), pw = static_cast<std::size_t>(st.pool_w);
      x = tg::pool2d(t, x, tg::PoolKind::kMax, ph, pw, ph, pw);
    }
  }
  return x;
}

Var Network::encode(Tape& t, const ProjectedGrid& grid, GridMode which) {
  if (which == GridMode::kFront) {
    return cfg_.use_front ? run_encoder(t, grid, cfg_.front, front_stages_) : zero_features(t);
  }
  return cfg_.use_bev ? run_encoder(t, grid, cfg_.bev, bev_stages_) : zero_features(t);
}

Var Network::fuse(Tape& t, Var front_features, Var bev_features) {
  if (t.value(front_features).shape() != t.value(bev_features).shape()) {
    throw tg::ShapeError("fuse: encoder outputs differ in shape");
  }
  Var x = tg::concat(t, {front_features, bev_features});
  x = tg::relu(t, tg::pointwise_conv(t, x, t.param(*fusion_pw_w_), t.param(*fusion_pw_b_)));
  x = tg::global_avg_pool(t, x);
  return tg::dense(t, x, t.param(*fusion_dense_w_), t.param(*fusion_dense_b_));
}

DecodeResult Network::decode_step(Tape& t, Var hidden, Var wp_prev, const LocalPoint& rp1,
                                  const LocalPoint& rp2, double omega_left, double omega_right) {
  const double rs = cfg_.route_point_scale, ws = cfg_.wheel_speed_scale;
  const Var aux = t.constant(tg::Tensor::vector(
      {rp1.x * rs, rp1.y * rs, rp2.x * rs, rp2.y * rs, omega_left * ws, omega_right * ws}));
  const Var x = tg::concat(t, {wp_prev, aux});
  tg::GruParams g;
  g.w_z = t.param(*gru_[0]);
  g.u_z = t.param(*gru_[1]);
  g.b_z = t.param(*gru_[2]);
  g.w_r = t.param(*gru_[3]);
  g.u_r = t.param(*gru_[4]);
  g.b_r = t.param(*gru_[5]);
  g.w_n = t.param(*gru_[6]);
  g.u_n = t.param(*gru_[7]);
  g.b_n = t.param(*gru_[8]);
  const Var h = tg::gru_cell(t, x, hidden, g);
  const Var dx = tg::dense(t, h, t.param(*dx_w_), t.param(*dx_b_));
  const Var dy = tg::dense(t, h, t.param(*dy_w_), t.param(*dy_b_));
  return {h, tg::concat(t, {dx, dy})};
}

std::pair<Var, Var> Network::control_heads(Tape& t, Var hidden, int command) {
  if (command < 0 || command >= cfg_.num_commands) {
    throw std::invalid_argument("control_heads: command " + std::to_string(command) +
                                " outside [0, " + std::to_string(cfg_.num_commands) + ")");
  }
  const Mlp& m = mlps_[static_cast<std::size_t>(command)];
  Var x = hidden;
  for (std::size_t l = 0; l + 1 < m.weights.size(); ++l) {
    x = tg::relu(t, tg::dense(t, x, t.param(*m.weights[l]), t.param(*m.biases[l])));
  }
  const Var out = tg::dense(t, x, t.param(*m.weights.back()), t.param(*m.biases.back()));
  return {tg::tanh(t, tg::slice(t, out, 0, 1)), tg::sigmoid(t, tg::slice(t, out, 1, 1))};
}

ForwardTrace Network::forward(Tape& t, const ObservationInput& obs) {
  ForwardTrace tr;
  const Var f = encode(t, obs.front, GridMode::kFront);
  const Var b = encode(t, obs.bev, GridMode::kBev);
  tr.latent = fuse(t, f, b);
  tr.shared_layer_node = tr.latent.id;

  Var hidden = tr.latent;
  Var wp = t.constant(tg::Tensor({2}));
  std::vector<Var> wps;
  for (int i = 0; i < cfg_.waypoint_steps; ++i) {
    const DecodeResult step = decode_step(t, hidden, wp, obs.rp1, obs.rp2, obs.omega_left, obs.omega_right);
    hidden = step.hidden;
    tr.deltas[static_cast<std::size_t>(i)] = step.delta;
    wp = tg::add(t, wp, step.delta);
    wps.push_back(wp);
  }
  tr.waypoints = tg::concat(t, wps);
  std::tie(tr.steering, tr.throttle) = control_heads(t, hidden, obs.command);
  return tr;
}

ModelOutput Network::read_output(const Tape& t, const ForwardTrace& trace) {
  ModelOutput out;
  const tg::Tensor& w = t.value(trace.waypoints);
  for (std::size_t i = 0; i < 3; ++i) out.waypoints[i] = {w[2 * i], w[2 * i + 1]};
  out.steering = t.value(trace.steering).item();
  out.throttle = t.value(trace.throttle).item();
  return out;
}

ModelOutput Network::predict(const ObservationInput& obs) {
  Tape t;
  t.set_grad_enabled(false);
  return read_output(t, forward(t, obs));
}

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
  return checkpoint.string() + ".json";
}

void save_model(const std::filesystem::path& path, const Network& net,
                const std::array<double, 3>& loss_weights) {
  tg::save_checkpoint(path, net.params());
  nlohmann::json j{{"model", nlohmann::json::parse(net.config().to_json())},
                   {"loss_weights", loss_weights}};
  std::ofstream os(sidecar_path(path));
  if (!os) throw tg::CheckpointError("cannot write " + sidecar_path(path).string());
  os << j.dump(2) << '\n';
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream is(sidecar_path(path));
  if (!is) throw tg::CheckpointError("missing model sidecar " + sidecar_path(path).string());
  std::stringstream ss;
  ss << is.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw tg::CheckpointError(sidecar_path(path).string() + ": " + e.what());
  }
  if (!j.contains("model")) throw tg::CheckpointError(sidecar_path(path).string() + ": no model config");
  LoadedModel out;
  out.network = std::make_unique<Network>(ModelConfig::from_json(j.at("model").dump()), 0);
  if (j.contains("loss_weights")) out.loss_weights = j.at("loss_weights").get<std::array<double, 3>>();
  tg::load_checkpoint(path, out.network->params());
  return out;
}

}  // namespace lidardrive::model
