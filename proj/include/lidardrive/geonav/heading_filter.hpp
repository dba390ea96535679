#pragma once

#include <array>
#include <optional>

namespace lidardrive::geonav {

/// One 9-axis IMU reading. Body axes coincide with the local frame (x lateral,
/// y forward, z up); gyro z reports the bearing rate d(bearing)/dt.
struct ImuSample {
  std::array<double, 3> accel{0.0, 0.0, 9.80665};  // m/s^2, specific force
  std::array<double, 3> gyro{0.0, 0.0, 0.0};       // rad/s
  std::array<double, 3> mag{0.0, 1.0, 0.0};        // normalized field
};

struct HeadingFilterConfig {
  double bearing_process_noise = 1e-6;  // rad^2/s
  double bias_process_noise = 1e-10;    // rad^2/s^3
  double mag_noise_std = 0.0873;        // rad (5 deg)
  bool use_magnetometer = true;
};

/// Two-state EKF: bearing and gyro-z bias.
struct HeadingFilterState {
  double bearing = 0.0;    // rad, wrapped to [-pi, pi)
  double gyro_bias = 0.0;  // rad/s
  // Row-major 2x2 covariance over (bearing, bias).
  std::array<double, 4> covariance{1.0, 0.0, 0.0, 1e-7};
};

/// Tilt-compensated magnetic bearing. Returns nullopt for a zero-norm field.
/// A zero-norm accel vector is treated as level.
std::optional<double> magnetic_bearing(const ImuSample& imu);

/// Predict with gyro z, then correct toward the magnetic bearing.
/// Throws std::invalid_argument when dt <= 0.
HeadingFilterState heading_update(const HeadingFilterState& state, const ImuSample& imu,
                                  double dt, const HeadingFilterConfig& cfg = {});

/// Filter state seeded from a single reading (bearing from the magnetometer
/// when available, zero otherwise).
HeadingFilterState heading_init(const ImuSample& imu, const HeadingFilterConfig& cfg = {});

}  // namespace lidardrive::geonav
