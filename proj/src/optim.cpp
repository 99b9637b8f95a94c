#include "cext/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cext/error.hpp"

namespace cext {

Adam::Adam(ParamList params, AdamConfig config) : params_(std::move(params)), config_(config) {
  if (!(config_.lr > 0)) throw ConfigError("learning rate must be positive");
  if (config_.beta1 < 0 || config_.beta1 >= 1 || config_.beta2 < 0 || config_.beta2 >= 1) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

void Adam::set_lr(double lr) {
  if (!(lr > 0)) throw ConfigError("learning rate must be positive");
  config_.lr = lr;
}

void Adam::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

void Adam::step() {
  ++step_;
  const double b1 = config_.beta1, b2 = config_.beta2, lr = config_.lr;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& t = params_[i].tensor;
    std::span<double> w = t.mutable_data();
    std::span<const double> g = t.grad();
    const bool has_grad = t.has_grad();
    const double wd = params_[i].decay ? config_.weight_decay : 0.0;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      double grad = has_grad ? g[j] : 0.0;
      if (config_.decoupled) {
        w[j] -= lr * wd * w[j];
      } else {
        grad += wd * w[j];
      }
      m[j] = b1 * m[j] + (1.0 - b1) * grad;
      v[j] = b2 * v[j] + (1.0 - b2) * grad * grad;
      w[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + config_.eps);
    }
  }
}

void ScheduleConfig::validate() const {
  if (!(base_lr > 0)) throw ConfigError("base_lr must be positive");
  if (min_lr < 0 || min_lr > base_lr) throw ConfigError("min_lr must lie in [0, base_lr]");
  if (warmup_epochs < 0 || warmup_epochs >= total_epochs) {
    throw ConfigError("warmup_epochs must be below total_epochs");
  }
}

double lr_at(double epoch, const ScheduleConfig& cfg) {
  const double e = std::clamp(epoch, 0.0, cfg.total_epochs);
  if (e < cfg.warmup_epochs) return cfg.base_lr * e / cfg.warmup_epochs;
  const double span = cfg.total_epochs - cfg.warmup_epochs;
  const double t = span > 0 ? (e - cfg.warmup_epochs) / span : 1.0;
  return cfg.min_lr + 0.5 * (cfg.base_lr - cfg.min_lr) * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace cext
