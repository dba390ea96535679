#pragma once

#include <limits>

namespace lidardrive::trainer {

struct PlateauConfig {
  double factor = 0.5;     // lr multiplier on a plateau
  int patience = 5;        // stalled epochs per lr reduction
  int stop_patience = 30;  // stalled epochs before training stops
};

/// Validation-driven learning-rate schedule and early stop.
///
/// An epoch improves only when its loss is a new strict minimum. After every
/// `patience` consecutive stalled epochs the rate is multiplied by `factor`;
/// after `stop_patience` consecutive stalled epochs training should stop.
class PlateauSchedule {
 public:
  PlateauSchedule(double initial_lr, const PlateauConfig& cfg = {});

  struct Decision {
    bool improved = false;
    bool lr_reduced = false;
    bool stop = false;
  };

  Decision observe(double val_loss);

  double lr() const { return lr_; }
  int stalled() const { return stalled_; }
  double best() const { return best_; }

 private:
  PlateauConfig cfg_;
  double lr_;
  double best_ = std::numeric_limits<double>::infinity();
  int stalled_ = 0;
};

}  // namespace lidardrive::trainer
