#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cext/error.hpp"
#include "cext/masking.hpp"
#include "cext/ops.hpp"

using namespace cext;

namespace {

Tensor iota(Shape s) {
  std::vector<double> v(shape_numel(s));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  return Tensor(std::move(s), std::move(v));
}

}  // namespace

TEST_CASE("mask plan from explicit noise") {
  const MaskPlan p = mask_plan_from_noise({0.3, 0.1, 0.9, 0.5}, 0.5);
  CHECK(p.ids_shuffle == std::vector<std::size_t>{1, 0, 3, 2});
  CHECK(p.ids_keep == std::vector<std::size_t>{1, 0});
  CHECK(p.binary_mask == std::vector<std::uint8_t>{0, 0, 1, 1});

  const Tensor tokens(Shape{1, 4, 1}, {10, 20, 30, 40});  // a, b, c, d
  const Tensor kept = apply_mask(tokens, std::span<const MaskPlan>(&p, 1));
  CHECK(kept[0] == 20);
  CHECK(kept[1] == 10);
}

TEST_CASE("mask ratio edge cases") {
  Rng rng(31);
  const MaskPlan all = make_mask_plan(6, 0.0, rng);
  CHECK(all.keep == 6);
  CHECK(std::count(all.binary_mask.begin(), all.binary_mask.end(), 0) == 6);
  CHECK(kept_tokens(16, 0.75) == 4);
  CHECK(kept_tokens(32, 0.9) == 3);
  CHECK(kept_tokens(32, 0.95) == 1);
  CHECK(kept_tokens(3, 0.9) == 1);
  CHECK_THROWS_AS(make_mask_plan(4, 1.0, rng), ConfigError);
  CHECK_THROWS_AS(make_mask_plan(0, 0.5, rng), ConfigError);
}

TEST_CASE("ties break by original index") {
  const MaskPlan p = mask_plan_from_noise({0.5, 0.5, 0.1, 0.5}, 0.5);
  CHECK(p.ids_shuffle == std::vector<std::size_t>{2, 0, 1, 3});
}

TEST_CASE("plans are deterministic per seed") {
  Rng a(5), b(5);
  const auto pa = make_batch_plans(3, 32, 0.75, a);
  const auto pb = make_batch_plans(3, 32, 0.75, b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(pa[i].ids_shuffle == pb[i].ids_shuffle);
  CHECK(pa[0].ids_shuffle != pa[1].ids_shuffle);
}

TEST_CASE("plan invariants over the full length and ratio grid") {
  Rng rng(32);
  for (std::size_t total = 1; total <= 64; ++total) {
    for (double rho : {0.0, 0.25, 0.5, 0.75, 0.9, 0.95}) {
      const MaskPlan p = make_mask_plan(total, rho, rng);
      const std::size_t expect = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(total * (1 - rho) + 1e-9)));
      CHECK(p.keep == expect);
      CHECK(p.ids_keep.size() == expect);
      std::size_t masked = 0;
      for (auto m : p.binary_mask) masked += m;
      CHECK(masked == total - p.keep);
      for (std::size_t j = 0; j < total; ++j) CHECK(p.ids_restore[p.ids_shuffle[j]] == j);
      for (std::size_t j = 1; j < total; ++j) CHECK(p.noise[p.ids_shuffle[j - 1]] <= p.noise[p.ids_shuffle[j]]);
      for (std::size_t i = 0; i < total; ++i) {
        const bool kept = std::find(p.ids_keep.begin(), p.ids_keep.end(), i) != p.ids_keep.end();
        CHECK((p.binary_mask[i] == 0) == kept);
      }

      const std::vector<MaskPlan> plans{p};
      const Tensor x = iota({1, total, 3});
      const Tensor vis = apply_mask(x, plans);
      const Tensor token(Shape{3}, {-1, -2, -3});
      const Tensor back = restore_sequence(vis, token, plans);
      for (std::size_t i = 0; i < total; ++i) {
        for (std::size_t d = 0; d < 3; ++d) {
          const double want = p.binary_mask[i] ? token[d] : x[i * 3 + d];
          CHECK(back[i * 3 + d] == want);
        }
      }
    }
  }
}

TEST_CASE("zero ratio round trip is the identity") {
  Rng rng(33);
  const std::vector<MaskPlan> plans = make_batch_plans(2, 8, 0.0, rng);
  const Tensor x = iota({2, 8, 4});
  const Tensor vis = apply_mask(x, plans);
  const Tensor back = restore_sequence(vis, Tensor::zeros({4}), plans);
  CHECK(std::equal(back.data().begin(), back.data().end(), x.data().begin()));
  std::vector<double> sorted(vis.data().begin(), vis.data().begin() + 32);
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::equal(sorted.begin(), sorted.end(), x.data().begin()));
}

TEST_CASE("one plan applied to two streams keeps identical positions") {
  Rng rng(34);
  const std::vector<MaskPlan> plans = make_batch_plans(4, 32, 0.75, rng);
  const Tensor csi = iota({4, 32, 2});
  const Tensor mp = scale(iota({4, 32, 2}), -1.0);
  const Tensor a = apply_mask(csi, plans), b = apply_mask(mp, plans);
  for (std::size_t i = 0; i < a.numel(); ++i) CHECK(b[i] == -a[i]);
}

TEST_CASE("length mismatches are rejected") {
  Rng rng(35);
  const std::vector<MaskPlan> plans = make_batch_plans(1, 8, 0.5, rng);
  CHECK_THROWS_AS(apply_mask(iota({1, 7, 2}), plans), DimensionError);
  CHECK_THROWS_AS(apply_mask(iota({2, 8, 2}), plans), DimensionError);
  CHECK_THROWS_AS(restore_sequence(iota({1, 4, 2}), Tensor::zeros({3}), plans), DimensionError);
}

TEST_CASE("restore_sequence routes gradients to visible tokens and the mask token") {
  Rng rng(36);
  const std::vector<MaskPlan> plans = make_batch_plans(1, 8, 0.5, rng);
  Tensor vis = Tensor(Shape{1, 4, 2}, 1.0).set_requires_grad();
  Tensor tok = Tensor(Shape{2}, 0.0).set_requires_grad();
  {
    GradTape tape;
    TapeScope scope(tape);
    tape.backward(sum(restore_sequence(vis, tok, plans)));
  }
  for (double g : vis.grad()) CHECK(g == 1.0);
  CHECK(tok.grad()[0] == 4.0);
}
