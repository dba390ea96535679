#include "lidardrive/geonav/heading_filter.hpp"

#include <cmath>
#include <stdexcept>

#include "lidardrive/geonav/geo.hpp"

namespace lidardrive::geonav {

namespace {

using Vec3 = std::array<double, 3>;

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 axpy(double k, const Vec3& x, const Vec3& y) {
  return {y[0] + k * x[0], y[1] + k * x[1], y[2] + k * x[2]};
}

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

}  // namespace

std::optional<double> magnetic_bearing(const ImuSample& imu) {
  const Vec3& m = imu.mag;
  if (!(norm(m) > 0.0)) return std::nullopt;

  Vec3 up{0.0, 0.0, 1.0};
  const double an = norm(imu.accel);
  if (an > 0.0) up = {imu.accel[0] / an, imu.accel[1] / an, imu.accel[2] / an};

  // Horizontal projections of the body forward axis and the field.
  const Vec3 forward = axpy(-up[1], up, Vec3{0.0, 1.0, 0.0});
  const Vec3 lateral = cross(forward, up);
  const Vec3 mh = axpy(-dot(m, up), up, m);
  if (!(norm(mh) > 0.0) || !(norm(forward) > 0.0)) return std::nullopt;
  return wrap_angle(std::atan2(dot(mh, lateral), dot(mh, forward)));
}

HeadingFilterState heading_update(const HeadingFilterState& state, const ImuSample& imu,
                                  double dt, const HeadingFilterConfig& cfg) {
  if (!(dt > 0.0)) throw std::invalid_argument("heading_update: dt must be positive");

  HeadingFilterState out = state;
  auto& P = out.covariance;

  // Predict: bearing += (gyro_z - bias) dt; F = [[1, -dt], [0, 1]].
  out.bearing = wrap_angle(state.bearing + (imu.gyro[2] - state.gyro_bias) * dt);
  const auto& Q = state.covariance;
  const double p00 = Q[0] - dt * (Q[1] + Q[2]) + dt * dt * Q[3] + cfg.bearing_process_noise * dt;
  const double p01 = Q[1] - dt * Q[3];
  const double p11 = Q[3] + cfg.bias_process_noise * dt;
  P = {p00, p01, p01, p11};

  if (!cfg.use_magnetometer) return out;
  const auto z = magnetic_bearing(imu);
  if (!z) return out;

  const double r = cfg.mag_noise_std * cfg.mag_noise_std;
  const double innovation = wrap_angle(*z - out.bearing);
  const double s = P[0] + r;
  const double k0 = P[0] / s;
  const double k1 = P[2] / s;
  out.bearing = wrap_angle(out.bearing + k0 * innovation);
  out.gyro_bias += k1 * innovation;

  // Joseph form: (I - K H) P (I - K H)^T + K R K^T with H = [1, 0].
  const double a00 = 1.0 - k0, a10 = -k1;
  const double m00 = a00 * P[0], m01 = a00 * P[1];
  const double m10 = a10 * P[0] + P[2], m11 = a10 * P[1] + P[3];
  const double n00 = m00 * a00 + k0 * k0 * r;
  const double n01 = m00 * a10 + m01 + k0 * k1 * r;
  const double n10 = m10 * a00 + k1 * k0 * r;
  const double n11 = m10 * a10 + m11 + k1 * k1 * r;
  const double off = 0.5 * (n01 + n10);
  P = {n00, off, off, n11};
  return out;
}

HeadingFilterState heading_init(const ImuSample& imu, const HeadingFilterConfig& cfg) {
  HeadingFilterState s;
  if (cfg.use_magnetometer) {
    if (const auto z = magnetic_bearing(imu)) {
      s.bearing = *z;
      s.covariance[0] = cfg.mag_noise_std * cfg.mag_noise_std;
      return s;
    }
  }
  s.covariance[0] = kPi * kPi;
  return s;
}

}  // namespace lidardrive::geonav
