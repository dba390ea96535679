#include "lidardrive/trainer/mgn.hpp"

#include <cmath>
#include <stdexcept>

namespace lidardrive::trainer {

std::array<double, 3> mgn_update(MgnState& state, const std::array<double, 3>& raw_norms,
                                 const std::array<double, 3>& alpha, const MgnConfig& cfg) {
  for (std::size_t k = 0; k < 3; ++k) {
    if (!std::isfinite(raw_norms[k]) || raw_norms[k] < 0.0) {
      throw std::invalid_argument("mgn_update: task gradient norms must be finite and non-negative");
    }
    if (!(alpha[k] > 0.0) || !std::isfinite(alpha[k])) {
      throw std::invalid_argument("mgn_update: loss weights must be positive");
    }
  }
  if (!cfg.enabled) return alpha;

  std::array<double, 3> effective{};
  for (std::size_t k = 0; k < 3; ++k) effective[k] = std::max(alpha[k] * raw_norms[k], cfg.floor);
  if (!state.initialized) {
    state.smoothed = effective;
    state.initialized = true;
  } else {
    for (std::size_t k = 0; k < 3; ++k) {
      state.smoothed[k] = cfg.smoothing * state.smoothed[k] + (1.0 - cfg.smoothing) * effective[k];
    }
  }

  const double mean = (state.smoothed[0] + state.smoothed[1] + state.smoothed[2]) / 3.0;
  std::array<double, 3> next{};
  double total = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    next[k] = alpha[k] * std::pow(mean / std::max(state.smoothed[k], cfg.floor), cfg.exponent);
    total += next[k];
  }
  for (double& a : next) a *= cfg.total / total;
  return next;
}

}  // namespace lidardrive::trainer
