#include "lidardrive/model/config.hpp"

#include <stdexcept>

#include "json.hpp"

namespace lidardrive::model {

using nlohmann::json;

std::array<int, 3> EncoderConfig::output_shape() const {
  int c = 0, h = height, w = width;
  for (const auto& s : stages) {
    c = s.channels;
    h /= s.pool_h;
    w /= s.pool_w;
  }
  return {c, h, w};
}

const char* channel_mode_name(ChannelMode m) {
  switch (m) {
    case ChannelMode::kSegDepth: return "seg+depth";
    case ChannelMode::kSeg: return "seg";
    case ChannelMode::kDepth: return "depth";
  }
  return "?";
}

ChannelMode parse_channel_mode(const std::string& s) {
  if (s == "seg+depth") return ChannelMode::kSegDepth;
  if (s == "seg") return ChannelMode::kSeg;
  if (s == "depth") return ChannelMode::kDepth;
  throw std::invalid_argument("unknown channel mode '" + s + "' (seg+depth, seg, depth)");
}

namespace {

EncoderConfig make_encoder(int height, int width, int first_pool_h, int first_pool_w) {
  EncoderConfig e;
  e.height = height;
  e.width = width;
  e.stages = {
      {8, 3, {1, 2}, first_pool_h, first_pool_w},
      {16, 3, {1}, 2, 4},
      {32, 3, {1}, 2, 2},
      {64, 3, {1}, 1, 1},
  };
  return e;
}

void validate_encoder(const EncoderConfig& e, const char* which) {
  const std::string tag = std::string(which) + " encoder: ";
  if (e.height <= 0 || e.width <= 0) throw std::invalid_argument(tag + "grid size must be positive");
  if (e.stages.empty()) throw std::invalid_argument(tag + "needs at least one stage");
  int h = e.height, w = e.width;
  for (std::size_t i = 0; i < e.stages.size(); ++i) {
    const auto& s = e.stages[i];
    const std::string st = tag + "stage " + std::to_string(i) + ": ";
    if (s.kernel <= 0 || s.kernel % 2 == 0) throw std::invalid_argument(st + "kernel must be odd");
    if (s.dilations.empty()) throw std::invalid_argument(st + "no dilations");
    for (int d : s.dilations) {
      if (d <= 0) throw std::invalid_argument(st + "dilation must be >= 1");
    }
    const int n = static_cast<int>(s.dilations.size());
    if (s.channels <= 0 || s.channels % n != 0) {
      throw std::invalid_argument(st + "channels must split evenly across dilations");
    }
    if (s.pool_h <= 0 || s.pool_w <= 0 || h % s.pool_h != 0 || w % s.pool_w != 0) {
      throw std::invalid_argument(st + "pool must divide the " + std::to_string(h) + "x" +
                                  std::to_string(w) + " feature map");
    }
    h /= s.pool_h;
    w /= s.pool_w;
  }
}

json stage_json(const EncoderStage& s) {
  return {{"channels", s.channels}, {"kernel", s.kernel}, {"dilations", s.dilations},
          {"pool", {s.pool_h, s.pool_w}}};
}

json encoder_json(const EncoderConfig& e) {
  json stages = json::array();
  for (const auto& s : e.stages) stages.push_back(stage_json(s));
  return {{"height", e.height}, {"width", e.width}, {"stages", stages}};
}

EncoderConfig encoder_from(const json& j, const EncoderConfig& fallback) {
  EncoderConfig e = fallback;
  e.height = j.value("height", e.height);
  e.width = j.value("width", e.width);
  if (j.contains("stages")) {
    e.stages.clear();
    for (const auto& js : j.at("stages")) {
      EncoderStage s;
      s.channels = js.at("channels").get<int>();
      s.kernel = js.value("kernel", 3);
      s.dilations = js.value("dilations", std::vector<int>{1});
      const auto pool = js.value("pool", std::vector<int>{1, 1});
      if (pool.size() != 2) throw std::invalid_argument("stage pool must be [h, w]");
      s.pool_h = pool[0];
      s.pool_w = pool[1];
      e.stages.push_back(std::move(s));
    }
  }
  return e;
}

}  // namespace

ModelConfig ModelConfig::desk_default() {
  ModelConfig c;
  c.front = make_encoder(64, 512, 4, 8);
  c.bev = make_encoder(128, 256, 8, 4);
  return c;
}

int ModelConfig::input_channels() const {
  switch (channel_mode) {
    case ChannelMode::kSegDepth: return 21;
    case ChannelMode::kSeg: return 20;
    case ChannelMode::kDepth: return 1;
  }
  return 0;
}

void ModelConfig::validate() const {
  validate_encoder(front, "front");
  validate_encoder(bev, "bev");
  if (front.output_shape() != bev.output_shape()) {
    const auto a = front.output_shape(), b = bev.output_shape();
    throw std::invalid_argument(
        "front and bev encoders must end at the same shape: " + std::to_string(a[0]) + "x" +
        std::to_string(a[1]) + "x" + std::to_string(a[2]) + " vs " + std::to_string(b[0]) + "x" +
        std::to_string(b[1]) + "x" + std::to_string(b[2]));
  }
  if (!use_front && !use_bev) throw std::invalid_argument("at least one encoder must be enabled");
  if (fusion_channels <= 0 || latent_size <= 0) {
    throw std::invalid_argument("fusion and latent sizes must be positive");
  }
  for (int h : mlp_hidden) {
    if (h <= 0) throw std::invalid_argument("mlp hidden sizes must be positive");
  }
  if (num_commands <= 0) throw std::invalid_argument("num_commands must be positive");
  if (waypoint_steps != 3) throw std::invalid_argument("waypoint_steps must be 3");
}

std::string ModelConfig::to_json() const {
  json j{{"front", encoder_json(front)},
         {"bev", encoder_json(bev)},
         {"fusion_channels", fusion_channels},
         {"latent_size", latent_size},
         {"mlp_hidden", mlp_hidden},
         {"num_commands", num_commands},
         {"waypoint_steps", waypoint_steps},
         {"route_point_scale", route_point_scale},
         {"wheel_speed_scale", wheel_speed_scale},
         {"use_front", use_front},
         {"use_bev", use_bev},
         {"channel_mode", channel_mode_name(channel_mode)},
         {"standardize_input", standardize_input}};
  return j.dump(2);
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("model config: ") + e.what());
  }
  ModelConfig c = desk_default();
  try {
    if (j.contains("front")) c.front = encoder_from(j.at("front"), c.front);
    if (j.contains("bev")) c.bev = encoder_from(j.at("bev"), c.bev);
    c.fusion_channels = j.value("fusion_channels", c.fusion_channels);
    c.latent_size = j.value("latent_size", c.latent_size);
    c.mlp_hidden = j.value("mlp_hidden", c.mlp_hidden);
    c.num_commands = j.value("num_commands", c.num_commands);
    c.waypoint_steps = j.value("waypoint_steps", c.waypoint_steps);
    c.route_point_scale = j.value("route_point_scale", c.route_point_scale);
    c.wheel_speed_scale = j.value("wheel_speed_scale", c.wheel_speed_scale);
    c.use_front = j.value("use_front", c.use_front);
    c.use_bev = j.value("use_bev", c.use_bev);
    if (j.contains("channel_mode")) c.channel_mode = parse_channel_mode(j.at("channel_mode").get<std::string>());
    c.standardize_input = j.value("standardize_input", c.standardize_input);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace lidardrive::model
