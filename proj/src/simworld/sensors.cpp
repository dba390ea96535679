#include "lidardrive/simworld/sensors.hpp"

#include <cmath>

namespace lidardrive::simworld {

namespace {

double gauss(std::mt19937_64& rng, double sigma) {
  if (sigma <= 0.0) return 0.0;
  std::normal_distribution<double> d(0.0, sigma);
  return d(rng);
}

}  // namespace

SensorReading sense(const World& world, const VehicleState& s, const NoiseConfig& noise,
                    std::mt19937_64& rng) {
  SensorReading r;
  // Draw order is fixed so a seed reproduces the whole stream.
  const double ne = gauss(rng, noise.gnss_sigma);
  const double nn = gauss(rng, noise.gnss_sigma);
  const geonav::GeoPoint truth = world.to_geo(s.position);
  r.fix = geonav::geo_delta_inverse(truth, ne, nn);

  // Bearing decreases when the world heading increases.
  r.imu.gyro = {gauss(rng, noise.gyro_sigma), gauss(rng, noise.gyro_sigma),
                -s.yaw_rate + gauss(rng, noise.gyro_sigma)};
  // Centripetal force points toward +x (left) in a counter-clockwise turn.
  r.imu.accel = {s.speed * s.yaw_rate + gauss(rng, noise.accel_sigma),
                 s.accel + gauss(rng, noise.accel_sigma), 9.80665 + gauss(rng, noise.accel_sigma)};

  const double bearing = bearing_of(s.heading);
  const double dip = geonav::deg_to_rad(noise.mag_dip_deg);
  r.imu.mag = {std::cos(dip) * std::sin(bearing) + gauss(rng, noise.mag_sigma),
               std::cos(dip) * std::cos(bearing) + gauss(rng, noise.mag_sigma),
               -std::sin(dip) + gauss(rng, noise.mag_sigma)};

  r.omega_left = s.omega_left + gauss(rng, noise.wheel_sigma);
  r.omega_right = s.omega_right + gauss(rng, noise.wheel_sigma);
  return r;
}

}  // namespace lidardrive::simworld
