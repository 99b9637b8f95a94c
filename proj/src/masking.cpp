#include "cext/masking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cext/error.hpp"
#include "cext/ops.hpp"

namespace cext {

std::size_t kept_tokens(std::size_t total, double mask_ratio) {
  if (!(mask_ratio >= 0.0 && mask_ratio < 1.0)) {
    throw ConfigError("mask ratio must lie in [0, 1), got " + std::to_string(mask_ratio));
  }
  if (total == 0) throw ConfigError("mask plan needs at least one token");
  // The epsilon absorbs representation error such as 30 * (1 - 0.9) = 2.9999...
  const auto keep = static_cast<std::size_t>(
      std::floor(static_cast<double>(total) * (1.0 - mask_ratio) + 1e-9));
  return std::clamp<std::size_t>(keep, 1, total);
}

MaskPlan mask_plan_from_noise(std::vector<double> noise, double mask_ratio) {
  MaskPlan plan;
  plan.mask_ratio = mask_ratio;
  plan.total = noise.size();
  plan.keep = kept_tokens(plan.total, mask_ratio);
  plan.noise = std::move(noise);

  plan.ids_shuffle.resize(plan.total);
  std::iota(plan.ids_shuffle.begin(), plan.ids_shuffle.end(), std::size_t{0});
  std::stable_sort(plan.ids_shuffle.begin(), plan.ids_shuffle.end(),
                   [&](std::size_t a, std::size_t b) { return plan.noise[a] < plan.noise[b]; });
  plan.ids_restore.resize(plan.total);
  for (std::size_t j = 0; j < plan.total; ++j) plan.ids_restore[plan.ids_shuffle[j]] = j;
  plan.ids_keep.assign(plan.ids_shuffle.begin(),
                       plan.ids_shuffle.begin() + static_cast<std::ptrdiff_t>(plan.keep));
  plan.binary_mask.assign(plan.total, 1);
  for (std::size_t i : plan.ids_keep) plan.binary_mask[i] = 0;
  return plan;
}

MaskPlan make_mask_plan(std::size_t total, double mask_ratio, Rng& rng) {
  kept_tokens(total, mask_ratio);  // validate before drawing
  std::vector<double> noise(total);
  for (double& v : noise) v = uniform01(rng);
  return mask_plan_from_noise(std::move(noise), mask_ratio);
}

std::vector<MaskPlan> make_batch_plans(std::size_t batch, std::size_t total, double mask_ratio,
                                       Rng& rng) {
  std::vector<MaskPlan> plans;
  plans.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) plans.push_back(make_mask_plan(total, mask_ratio, rng));
  return plans;
}

namespace {

void check_plans(const Tensor& x, std::span<const MaskPlan> plans, std::size_t expect_len,
                 const char* op) {
  if (x.ndim() != 3) throw DimensionError(std::string(op) + " expects [B,L,D]");
  if (plans.size() != x.dim(0)) {
    throw DimensionError(std::string(op) + ": " + std::to_string(plans.size()) +
                         " plans for batch " + std::to_string(x.dim(0)));
  }
  for (const auto& p : plans) {
    const std::size_t want = expect_len == 0 ? p.total : p.keep;
    if (x.dim(1) != want || p.keep != plans[0].keep) {
      throw DimensionError(std::string(op) + ": sequence length " + std::to_string(x.dim(1)) +
                           " does not match the mask plan");
    }
  }
}

}  // namespace

Tensor apply_mask(const Tensor& tokens, std::span<const MaskPlan> plans) {
  check_plans(tokens, plans, 0, "apply_mask");
  std::vector<std::vector<std::size_t>> idx;
  idx.reserve(plans.size());
  for (const auto& p : plans) idx.push_back(p.ids_keep);
  return gather_tokens(tokens, idx);
}

Tensor restore_sequence(const Tensor& visible, const Tensor& mask_token,
                        std::span<const MaskPlan> plans) {
  check_plans(visible, plans, 1, "restore_sequence");
  const std::size_t batch = visible.dim(0), d = visible.dim(2);
  if (mask_token.numel() != d) {
    throw DimensionError("mask token width " + std::to_string(mask_token.numel()) +
                         " does not match token width " + std::to_string(d));
  }
  const std::size_t total = plans.empty() ? visible.dim(1) : plans[0].total;
  Tensor seq = visible;
  if (total > visible.dim(1)) {
    const Tensor fill = broadcast_to(reshape(mask_token, Shape{d}),
                                     Shape{batch, total - visible.dim(1), d});
    seq = concat(visible, fill, 1);
  }
  std::vector<std::vector<std::size_t>> idx;
  idx.reserve(plans.size());
  for (const auto& p : plans) idx.push_back(p.ids_restore);
  return gather_tokens(seq, idx);
}

}  // namespace cext
