#include "lidardrive/tensorgrad/optimizer.hpp"

#include <cmath>

namespace lidardrive::tensorgrad {

void adamw_step(ParameterSet& params, AdamWState& state, double lr, const AdamWConfig& cfg) {
  if (state.m.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m.emplace_back(params[i].value.shape());
      state.v.emplace_back(params[i].value.shape());
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("adamw_step: optimizer state tracks " + std::to_string(state.m.size()) +
                     " parameters, set has " + std::to_string(params.size()));
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  const double decay = 1.0 - lr * cfg.weight_decay;

  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    if (p.grad.size() != p.value.size()) {
      throw ShapeError("adamw_step: gradient of '" + p.name + "' has wrong size");
    }
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j];
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g;
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g * g;
      const double mh = m[j] / bc1;
      const double vh = v[j] / bc2;
      p.value[j] = p.value[j] * decay - lr * mh / (std::sqrt(vh) + cfg.eps);
    }
  }
}

}  // namespace lidardrive::tensorgrad
