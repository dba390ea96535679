#include "lidardrive/evalharness/app_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace lidardrive::evalharness {

using nlohmann::json;

namespace {

/// Reads keys of one JSON object and complains about the ones nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(path_ + ": unknown key \"" + key + "\"");
    }
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const std::string& key) const { return j_.at(key); }
  std::string path(const std::string& key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_pid(Section& parent, const std::string& key, controller::PidGains& g) {
  if (!parent.has(key)) return;
  Section s(parent.at(key), parent.path(key));
  s.get("kp", g.kp);
  s.get("ki", g.ki);
  s.get("kd", g.kd);
  s.get("out_min", g.out_min);
  s.get("out_max", g.out_max);
}

void read_conditions(Section& s, const std::string& key, std::vector<simworld::Condition>& out) {
  std::vector<std::string> names;
  if (!s.has(key)) return;
  s.get(key, names);
  out.clear();
  for (const auto& n : names) {
    try {
      out.push_back(simworld::parse_condition(n));
    } catch (const std::exception& e) {
      throw ConfigError(s.path(key) + ": " + e.what());
    }
  }
  if (out.empty()) throw ConfigError(s.path(key) + ": at least one condition is required");
}

json pid_json(const controller::PidGains& g) {
  return {{"kp", g.kp}, {"ki", g.ki}, {"kd", g.kd}, {"out_min", g.out_min}, {"out_max", g.out_max}};
}

json conditions_json(const std::vector<simworld::Condition>& cs) {
  json a = json::array();
  for (auto c : cs) a.push_back(simworld::condition_name(c));
  return a;
}

}  // namespace

AppConfig AppConfig::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  AppConfig c;
  Section top(root, "config");

  if (top.has("model")) {
    try {
      c.model = model::ModelConfig::from_json(top.at("model").dump());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  if (top.has("train")) {
    Section s(top.at("train"), "train");
    auto& t = c.train.config;
    s.get("batch_size", t.batch_size);
    s.get("lr", t.lr);
    s.get("weight_decay", t.weight_decay);
    s.get("lr_factor", t.plateau.factor);
    s.get("plateau_patience", t.plateau.patience);
    s.get("stop_patience", t.plateau.stop_patience);
    s.get("max_epochs", t.max_epochs);
    s.get("seed", t.seed);
    s.get("mgn_enabled", t.mgn.enabled);
    s.get("mgn_exponent", t.mgn.exponent);
    s.get("mgn_smoothing", t.mgn.smoothing);
    s.get("initial_alpha", t.initial_alpha);
    s.get("val_fraction", c.train.val_fraction);
    s.get("stride", c.train.stride);
    s.get("model_seed", c.train.model_seed);
    if (t.batch_size < 1 || t.max_epochs < 1 || !(t.lr > 0.0) || c.train.stride < 1 ||
        c.train.val_fraction < 0.0 || c.train.val_fraction >= 1.0) {
      throw ConfigError("train: batch_size, max_epochs, lr and stride must be positive; val_fraction in [0, 1)");
    }
  }

  if (top.has("controller")) {
    Section s(top.at("controller"), "controller");
    read_pid(s, "lateral", c.controller.lateral);
    read_pid(s, "longitudinal", c.controller.longitudinal);
    s.get("dt", c.controller.dt);
    s.get("wheel_radius", c.controller.wheel_radius);
    s.get("deadband", c.controller.deadband);
  }

  if (top.has("lidar")) {
    Section s(top.at("lidar"), "lidar");
    auto& l = c.sim.config.lidar;
    std::string profile;
    s.get("profile", profile);
    if (profile == "full") l = simworld::LidarConfig::full();
    else if (!profile.empty() && profile != "desk") throw ConfigError("lidar.profile: expected desk or full");
    s.get("rings", l.rings);
    s.get("elevation_min_deg", l.elevation_min_deg);
    s.get("elevation_max_deg", l.elevation_max_deg);
    s.get("azimuth_steps", l.azimuth_steps);
    s.get("max_range", l.max_range);
    s.get("mount_height", l.mount_height);
    if (l.rings < 1 || l.azimuth_steps < 1 || !(l.max_range > 0.0)) {
      throw ConfigError("lidar: rings, azimuth_steps and max_range must be positive");
    }
  }

  if (top.has("sim")) {
    Section s(top.at("sim"), "sim");
    auto& sc = c.sim.config;
    s.get("dt", sc.dt);
    s.get("timeout_factor", sc.timeout_factor);
    s.get("repeats", c.sim.repeats);
    read_conditions(s, "conditions", c.sim.conditions);
    if (s.has("noise")) {
      Section n(s.at("noise"), "sim.noise");
      n.get("gnss_sigma", sc.noise.gnss_sigma);
      n.get("gyro_sigma", sc.noise.gyro_sigma);
      n.get("accel_sigma", sc.noise.accel_sigma);
      n.get("mag_sigma", sc.noise.mag_sigma);
      n.get("wheel_sigma", sc.noise.wheel_sigma);
      n.get("mag_dip_deg", sc.noise.mag_dip_deg);
    }
    if (s.has("vehicle")) {
      Section v(s.at("vehicle"), "sim.vehicle");
      v.get("wheel_radius", sc.vehicle.wheel_radius);
      v.get("track", sc.vehicle.track);
      v.get("max_speed", sc.vehicle.max_speed);
      v.get("speed_tau", sc.vehicle.speed_tau);
      v.get("max_yaw_rate", sc.vehicle.max_yaw_rate);
    }
    if (s.has("intervention")) {
      Section v(s.at("intervention"), "sim.intervention");
      v.get("horizon", sc.intervention.horizon);
      v.get("substeps", sc.intervention.substeps);
      v.get("clearance", sc.intervention.clearance);
      v.get("min_takeover", sc.intervention.min_takeover);
    }
    if (s.has("expert")) {
      Section v(s.at("expert"), "sim.expert");
      v.get("lookahead", sc.expert.lookahead);
      v.get("curve_throttle", sc.expert.curve_throttle);
      v.get("obstacle_throttle", sc.expert.obstacle_throttle);
      v.get("finish_radius", sc.expert.finish_radius);
    }
    if (!(sc.dt > 0.0) || c.sim.repeats < 1 || !(sc.timeout_factor > 0.0)) {
      throw ConfigError("sim: dt, repeats and timeout_factor must be positive");
    }
  }

  if (top.has("eval")) {
    Section s(top.at("eval"), "eval");
    read_conditions(s, "conditions", c.eval.conditions);
    s.get("repeats", c.eval.repeats);
    s.get("stride", c.eval.stride);
    s.get("logged_commands", c.eval.logged_commands);
    s.get("skip_corrupt", c.eval.skip_corrupt);
    s.get("interventions", c.eval.interventions);
    if (c.eval.repeats < 1 || c.eval.stride < 1) throw ConfigError("eval: repeats and stride must be positive");
  }
  return c;
}

AppConfig AppConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string AppConfig::to_json_text() const {
  const auto& t = train.config;
  const auto& sc = sim.config;
  json j = {
      {"model", json::parse(model.to_json())},
      {"train",
       {{"batch_size", t.batch_size}, {"lr", t.lr}, {"weight_decay", t.weight_decay},
        {"lr_factor", t.plateau.factor}, {"plateau_patience", t.plateau.patience},
        {"stop_patience", t.plateau.stop_patience}, {"max_epochs", t.max_epochs}, {"seed", t.seed},
        {"mgn_enabled", t.mgn.enabled}, {"mgn_exponent", t.mgn.exponent},
        {"mgn_smoothing", t.mgn.smoothing}, {"initial_alpha", t.initial_alpha},
        {"val_fraction", train.val_fraction}, {"stride", train.stride}, {"model_seed", train.model_seed}}},
      {"controller",
       {{"lateral", pid_json(controller.lateral)}, {"longitudinal", pid_json(controller.longitudinal)},
        {"dt", controller.dt}, {"wheel_radius", controller.wheel_radius}, {"deadband", controller.deadband}}},
      {"lidar",
       {{"rings", sc.lidar.rings}, {"elevation_min_deg", sc.lidar.elevation_min_deg},
        {"elevation_max_deg", sc.lidar.elevation_max_deg}, {"azimuth_steps", sc.lidar.azimuth_steps},
        {"max_range", sc.lidar.max_range}, {"mount_height", sc.lidar.mount_height}}},
      {"sim",
       {{"dt", sc.dt}, {"timeout_factor", sc.timeout_factor}, {"repeats", sim.repeats},
        {"conditions", conditions_json(sim.conditions)},
        {"noise", {{"gnss_sigma", sc.noise.gnss_sigma}, {"gyro_sigma", sc.noise.gyro_sigma},
                   {"accel_sigma", sc.noise.accel_sigma}, {"mag_sigma", sc.noise.mag_sigma},
                   {"wheel_sigma", sc.noise.wheel_sigma}, {"mag_dip_deg", sc.noise.mag_dip_deg}}},
        {"vehicle", {{"wheel_radius", sc.vehicle.wheel_radius}, {"track", sc.vehicle.track},
                     {"max_speed", sc.vehicle.max_speed}, {"speed_tau", sc.vehicle.speed_tau},
                     {"max_yaw_rate", sc.vehicle.max_yaw_rate}}},
        {"intervention", {{"horizon", sc.intervention.horizon}, {"substeps", sc.intervention.substeps},
                          {"clearance", sc.intervention.clearance},
                          {"min_takeover", sc.intervention.min_takeover}}},
        {"expert", {{"lookahead", sc.expert.lookahead}, {"curve_throttle", sc.expert.curve_throttle},
                    {"obstacle_throttle", sc.expert.obstacle_throttle},
                    {"finish_radius", sc.expert.finish_radius}}}}},
      {"eval",
       {{"conditions", conditions_json(eval.conditions)}, {"repeats", eval.repeats},
        {"stride", eval.stride}, {"logged_commands", eval.logged_commands},
        {"skip_corrupt", eval.skip_corrupt}, {"interventions", eval.interventions}}}};
  return j.dump(2);
}

}  // namespace lidardrive::evalharness
