#pragma once

#include <array>

namespace lidardrive::trainer {

struct MgnConfig {
  bool enabled = true;     // false keeps alpha frozen
  double exponent = 0.5;   // restoring strength p
  double smoothing = 0.9;  // EMA factor on the weighted norms
  double floor = 1e-8;     // smallest norm used
  double total = 3.0;      // sum of the weights after every update
};

struct MgnState {
  std::array<double, 3> smoothed{0.0, 0.0, 0.0};
  bool initialized = false;
};

/// Gradient-norm equalizing weight update.
///
/// `raw_norms` are the norms of each unweighted task gradient on the shared
/// layer; the task's effective norm is alpha_k * raw_k. The smoothed
/// effective norms G_k give alpha'_k ~ alpha_k (mean(G) / G_k)^p, rescaled so
/// the weights sum to `total`. Throws std::invalid_argument on non-finite or
/// negative norms or non-positive weights.
std::array<double, 3> mgn_update(MgnState& state, const std::array<double, 3>& raw_norms,
                                 const std::array<double, 3>& alpha, const MgnConfig& cfg = {});

}  // namespace lidardrive::trainer
