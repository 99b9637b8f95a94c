#pragma once

#include <cstdint>
#include <vector>

#include "cext/nn.hpp"

namespace cext {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  /// AdamW: decay is applied to the weights directly, outside the moments.
  /// Otherwise it is added to the gradient (classic L2).
  bool decoupled = false;

  static AdamConfig adam(double lr) { return AdamConfig{lr, 0.9, 0.999, 1e-8, 0.0, false}; }
  static AdamConfig adamw(double lr, double decay = 0.05) {
    return AdamConfig{lr, 0.9, 0.95, 1e-8, decay, true};
  }
};

/// Adam / AdamW over a parameter list. Parameters flagged decay=false are
/// never decayed. A parameter without a gradient is treated as having a
/// zero gradient.
class Adam {
 public:
  Adam(ParamList params, AdamConfig config);

  void step();
  void zero_grad();
  void set_lr(double lr);
  double lr() const { return config_.lr; }
  std::uint64_t steps() const { return step_; }
  const ParamList& params() const { return params_; }

 private:
  ParamList params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t step_ = 0;
};

/// Linear warmup from 0 to base_lr over warmup_epochs, then cosine
/// annealing to min_lr at total_epochs.
struct ScheduleConfig {
  double base_lr = 1e-3;
  double warmup_epochs = 40;
  double min_lr = 1e-6;
  double total_epochs = 400;

  void validate() const;
};

/// `epoch` may be fractional (step-granular schedules).
double lr_at(double epoch, const ScheduleConfig& cfg);

}  // namespace cext
