#include "lidardrive/simworld/episode_log.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lidardrive::simworld {

namespace {

constexpr std::array<char, 4> kMagic{'D', 'P', 'L', '2'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  template <typename T>
  void put(T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    bytes.insert(bytes.end(), buf, buf + sizeof(T));
  }
  void f32(double v) { put<float>(static_cast<float>(v)); }
  std::vector<unsigned char> bytes;
};

class Reader {
 public:
  Reader(std::vector<unsigned char> data, std::string name) : data_(std::move(data)), name_(std::move(name)) {}
  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) throw LogError(name_ + ": truncated log at byte " + std::to_string(pos_));
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, data_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }
  double f32() { return static_cast<double>(get<float>()); }
  std::size_t remaining() const { return data_.size() - pos_; }
  const std::string& name() const { return name_; }

 private:
  std::vector<unsigned char> data_;
  std::string name_;
  std::size_t pos_ = 0;
};

// Kept out of line: g++ 11 at -O3 mis-vectorizes quantize() when this is
// inlined and returns some coordinates unrounded.
[[gnu::noinline]] double q32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

std::filesystem::path log_sidecar_path(const std::filesystem::path& p) { return p.string() + ".json"; }

LogSample quantize(const LogSample& s) {
  LogSample q = s;
  for (auto& p : q.points) {
    p.x = q32(p.x);
    p.y = q32(p.y);
    p.z = q32(p.z);
  }
  for (auto* v : {&q.imu.accel, &q.imu.gyro, &q.imu.mag}) {
    for (double& c : *v) c = q32(c);
  }
  q.omega_left = q32(q.omega_left);
  q.omega_right = q32(q.omega_right);
  q.steering = q32(q.steering);
  q.throttle = q32(q.throttle);
  for (auto& w : q.waypoints) {
    w.x = q32(w.x);
    w.y = q32(w.y);
  }
  return q;
}

void write_log(const std::filesystem::path& path, const EpisodeLog& log) {
  Writer w;
  w.bytes.insert(w.bytes.end(), kMagic.begin(), kMagic.end());
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(log.samples.size()));
  for (const LogSample& s : log.samples) {
    if (s.command > 2) throw LogError("write_log: command out of range");
    w.put<double>(s.timestamp);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(s.points.size()));
    for (const auto& p : s.points) {
      w.f32(p.x);
      w.f32(p.y);
      w.f32(p.z);
      w.put<std::uint8_t>(p.class_id);
    }
    w.put<double>(s.fix.lat);
    w.put<double>(s.fix.lon);
    for (const auto* v : {&s.imu.accel, &s.imu.gyro, &s.imu.mag}) {
      for (double c : *v) w.f32(c);
    }
    w.f32(s.omega_left);
    w.f32(s.omega_right);
    w.f32(s.steering);
    w.f32(s.throttle);
    for (const auto& p : s.waypoints) {
      w.f32(p.x);
      w.f32(p.y);
    }
    w.put<std::uint8_t>(s.command);
  }
  {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw LogError("cannot open " + path.string() + " for writing");
    os.write(reinterpret_cast<const char*>(w.bytes.data()), static_cast<std::streamsize>(w.bytes.size()));
    if (!os) throw LogError("write failed: " + path.string());
  }

  nlohmann::json route = nlohmann::json::array();
  for (const auto& g : log.meta.route) route.push_back({{"lat", g.lat}, {"lon", g.lon}});
  const nlohmann::json meta{{"scene", log.meta.scene},
                            {"route_index", log.meta.route_index},
                            {"condition", condition_name(log.meta.condition)},
                            {"repeat", log.meta.repeat},
                            {"seed", log.meta.seed},
                            {"route", route},
                            {"origin", {{"lat", log.meta.origin.lat}, {"lon", log.meta.origin.lon}}},
                            {"dt", log.meta.dt},
                            {"driver", log.meta.driver},
                            {"samples", log.samples.size()}};
  std::ofstream js(log_sidecar_path(path), std::ios::trunc);
  if (!js) throw LogError("cannot write " + log_sidecar_path(path).string());
  js << meta.dump(1) << '\n';
}

EpisodeLog read_log(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LogError("cannot open log " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  Reader r(std::move(data), path.string());

  std::array<char, 4> magic{};
  for (char& c : magic) c = static_cast<char>(r.get<std::uint8_t>());
  if (magic != kMagic) throw LogError(path.string() + ": not an episode log");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw LogError(path.string() + ": unsupported log version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>();

  EpisodeLog log;
  log.samples.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    LogSample s;
    s.timestamp = r.get<double>();
    const auto n = r.get<std::uint32_t>();
    if (static_cast<std::size_t>(n) * 13 > r.remaining()) throw LogError(path.string() + ": point count exceeds file");
    s.points.resize(n);
    for (auto& p : s.points) {
      p.x = r.f32();
      p.y = r.f32();
      p.z = r.f32();
      p.class_id = r.get<std::uint8_t>();
      if (p.class_id >= projection::kNumClasses) {
        throw LogError(path.string() + ": sample " + std::to_string(i) + " has class " + std::to_string(p.class_id));
      }
    }
    s.fix.lat = r.get<double>();
    s.fix.lon = r.get<double>();
    for (auto* v : {&s.imu.accel, &s.imu.gyro, &s.imu.mag}) {
      for (double& c : *v) c = r.f32();
    }
    s.omega_left = r.f32();
    s.omega_right = r.f32();
    s.steering = r.f32();
    s.throttle = r.f32();
    for (auto& p : s.waypoints) {
      p.x = r.f32();
      p.y = r.f32();
    }
    s.command = r.get<std::uint8_t>();
    if (s.command > 2) throw LogError(path.string() + ": sample " + std::to_string(i) + " has bad command");
    log.samples.push_back(std::move(s));
  }
  if (r.remaining() != 0) throw LogError(path.string() + ": trailing bytes after last sample");

  std::ifstream js(log_sidecar_path(path));
  if (!js) throw LogError("missing log sidecar " + log_sidecar_path(path).string());
  std::stringstream ss;
  ss << js.rdbuf();
  try {
    const auto j = nlohmann::json::parse(ss.str());
    log.meta.scene = j.at("scene").get<std::string>();
    log.meta.route_index = j.at("route_index").get<int>();
    log.meta.condition = parse_condition(j.at("condition").get<std::string>());
    log.meta.repeat = j.at("repeat").get<int>();
    log.meta.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& g : j.at("route")) log.meta.route.push_back({g.at("lat").get<double>(), g.at("lon").get<double>()});
    log.meta.origin = {j.at("origin").at("lat").get<double>(), j.at("origin").at("lon").get<double>()};
    log.meta.dt = j.at("dt").get<double>();
    log.meta.driver = j.value("driver", std::string("expert"));
  } catch (const std::exception& e) {
    throw LogError(log_sidecar_path(path).string() + ": " + e.what());
  }
  if (log.meta.route.empty()) throw LogError(log_sidecar_path(path).string() + ": empty route");
  return log;
}

}  // namespace lidardrive::simworld
