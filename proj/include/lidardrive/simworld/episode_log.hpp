#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "lidardrive/geonav/geo.hpp"
#include "lidardrive/geonav/heading_filter.hpp"
#include "lidardrive/projection/grid.hpp"
#include "lidardrive/simworld/world.hpp"

namespace lidardrive::simworld {

class LogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One 4 Hz record.
struct LogSample {
  double timestamp = 0.0;
  std::vector<projection::LabeledPoint> points;
  geonav::GeoPoint fix;
  geonav::ImuSample imu;
  double omega_left = 0.0;
  double omega_right = 0.0;
  double steering = 0.0;
  double throttle = 0.0;
  std::array<geonav::LocalPoint, 3> waypoints{};  // vehicle position at +1, +2, +3 s
  std::uint8_t command = 0;
};

/// Episode context kept in the JSON sidecar next to each log.
struct LogMeta {
  std::string scene;
  int route_index = 0;
  Condition condition = Condition::kLight;
  int repeat = 0;
  std::uint64_t seed = 0;
  std::vector<geonav::GeoPoint> route;
  geonav::GeoPoint origin;
  double dt = 0.25;
  std::string driver = "expert";
};

struct EpisodeLog {
  LogMeta meta;
  std::vector<LogSample> samples;
};

/// Binary record stream, little-endian: "DPL2", u32 version, u32 sample
/// count, then per sample f64 timestamp, u32 point count, points as
/// (f32 x, f32 y, f32 z, u8 class), f64 lat, f64 lon, f32 x 9 IMU (accel,
/// gyro, mag), f32 x 2 wheel speeds, f32 steering, f32 throttle, f32 x 6
/// waypoints, u8 command. The sidecar "<path>.json" holds LogMeta.
void write_log(const std::filesystem::path& path, const EpisodeLog& log);
EpisodeLog read_log(const std::filesystem::path& path);

/// Rounds every stored field to its on-disk precision.
LogSample quantize(const LogSample& s);

std::filesystem::path log_sidecar_path(const std::filesystem::path& log_path);

}  // namespace lidardrive::simworld
