#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cext/rng.hpp"
#include "cext/tensor.hpp"

namespace cext {

/// Random token mask shared by the CSI and multipath streams of one sample.
///
/// Invariants: keep == max(1, floor(total * (1 - mask_ratio)));
/// ids_restore[ids_shuffle[j]] == j; binary_mask[i] == 0 iff i is in ids_keep.
struct MaskPlan {
  double mask_ratio = 0.0;
  std::size_t total = 0;
  std::size_t keep = 0;
  std::vector<double> noise;
  std::vector<std::size_t> ids_shuffle;
  std::vector<std::size_t> ids_keep;
  std::vector<std::size_t> ids_restore;
  std::vector<std::uint8_t> binary_mask;  // 1 = masked

  std::size_t masked() const { return total - keep; }
};

std::size_t kept_tokens(std::size_t total, double mask_ratio);

/// Plan from explicit noise: stable ascending sort, first `keep` survive.
MaskPlan mask_plan_from_noise(std::vector<double> noise, double mask_ratio);

/// Plan with uniform noise drawn from `rng`.
MaskPlan make_mask_plan(std::size_t total, double mask_ratio, Rng& rng);

/// Independent plans for each element of a batch.
std::vector<MaskPlan> make_batch_plans(std::size_t batch, std::size_t total,
                                       double mask_ratio, Rng& rng);

/// [B, L, D] -> [B, keep, D], kept tokens in ids_keep order.
Tensor apply_mask(const Tensor& tokens, std::span<const MaskPlan> plans);

/// [B, keep, D] -> [B, L, D]: visible tokens return to their positions and
/// every masked position holds `mask_token` ([D]).
Tensor restore_sequence(const Tensor& visible, const Tensor& mask_token,
                        std::span<const MaskPlan> plans);

}  // namespace cext
