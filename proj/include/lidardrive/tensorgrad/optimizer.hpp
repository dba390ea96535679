#pragma once

#include <cstdint>
#include <vector>

#include "lidardrive/tensorgrad/tensor.hpp"

namespace lidardrive::tensorgrad {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-3;
};

/// First and second moment estimates, one pair per parameter in set order.
struct AdamWState {
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

/// One AdamW update using each Parameter::grad. Decay shrinks the weights
/// directly (p <- p (1 - lr wd)) before the bias-corrected Adam step.
void adamw_step(ParameterSet& params, AdamWState& state, double lr, const AdamWConfig& cfg);

}  // namespace lidardrive::tensorgrad
