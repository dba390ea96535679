#pragma once

#include <random>

#include "lidardrive/geonav/heading_filter.hpp"
#include "lidardrive/simworld/vehicle.hpp"
#include "lidardrive/simworld/world.hpp"

namespace lidardrive::simworld {

struct NoiseConfig {
  double gnss_sigma = 0.3;     // m, per horizontal axis
  double gyro_sigma = 0.002;   // rad/s
  double accel_sigma = 0.02;   // m/s^2
  double mag_sigma = 0.02;     // per component of the unit field
  double wheel_sigma = 0.0;    // rad/s
  double mag_dip_deg = 0.0;    // field inclination below the horizon

  static NoiseConfig none() { return {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}; }
};

struct SensorReading {
  geonav::GeoPoint fix;
  geonav::ImuSample imu;
  double omega_left = 0.0;
  double omega_right = 0.0;
};

/// GNSS, IMU and wheel encoders for the current state. The gyro reports the
/// bearing rate over the last step, the accelerometer the specific force in
/// body axes, the magnetometer the unit field in body axes.
SensorReading sense(const World& world, const VehicleState& state, const NoiseConfig& noise,
                    std::mt19937_64& rng);

}  // namespace lidardrive::simworld
