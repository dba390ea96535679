#include "lidardrive/trainer/schedule.hpp"

#include <stdexcept>

namespace lidardrive::trainer {

PlateauSchedule::PlateauSchedule(double initial_lr, const PlateauConfig& cfg)
    : cfg_(cfg), lr_(initial_lr) {
  if (!(initial_lr > 0.0) || !(cfg.factor > 0.0) || cfg.patience < 1 || cfg.stop_patience < 1) {
    throw std::invalid_argument("PlateauSchedule: lr, factor and patience values must be positive");
  }
}

PlateauSchedule::Decision PlateauSchedule::observe(double val_loss) {
  Decision d;
  if (val_loss < best_) {
    best_ = val_loss;
    stalled_ = 0;
    d.improved = true;
    return d;
  }
  ++stalled_;
  if (stalled_ % cfg_.patience == 0) {
    lr_ *= cfg_.factor;
    d.lr_reduced = true;
  }
  d.stop = stalled_ >= cfg_.stop_patience;
  return d;
}

}  // namespace lidardrive::trainer
