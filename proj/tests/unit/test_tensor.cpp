#include <doctest.h>

#include <cmath>

#include "cext/error.hpp"
#include "cext/ops.hpp"
#include "gradcheck.hpp"

using namespace cext;
using cext::testing::max_grad_error;
using cext::testing::Probe;

namespace {

Tensor randn(Shape s, Rng& rng, bool grad = true) {
  std::vector<double> v(shape_numel(s));
  for (double& x : v) x = normal(rng);
  Tensor t(std::move(s), std::move(v));
  if (grad) t.set_requires_grad();
  return t;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

TEST_CASE("tensor rejects a value count that does not match the shape") {
  CHECK_THROWS_AS(Tensor(Shape{2, 3}, std::vector<double>(5)), DimensionError);
  const Tensor t(Shape{2, 3}, 1.5);
  CHECK(t.numel() == 6);
  CHECK(t.dim(-1) == 3);
}

TEST_CASE("ops never write into their inputs") {
  Rng rng(1);
  const Tensor a = randn({3, 3}, rng);
  const std::vector<double> before(a.data().begin(), a.data().end());
  const Tensor b = add(a, a);
  const Tensor c = reshape(a, {9});
  CHECK_FALSE(c.same_buffer(a));
  CHECK(std::vector<double>(a.data().begin(), a.data().end()) == before);
  CHECK(b[0] == doctest::Approx(2 * before[0]));
}

TEST_CASE("matmul examples") {
  const Tensor eye(Shape{2, 2}, {1, 0, 0, 1});
  const Tensor m(Shape{2, 2}, {1, 2, 3, 4});
  const Tensor swap(Shape{2, 2}, {0, 1, 1, 0});
  const Tensor r = matmul(eye, m);
  CHECK(std::vector<double>(r.data().begin(), r.data().end()) == std::vector<double>{1, 2, 3, 4});
  const Tensor p = matmul(eye, swap);
  CHECK(std::vector<double>(p.data().begin(), p.data().end()) == std::vector<double>{0, 1, 1, 0});
}

TEST_CASE("matmul gradient of sum is ones times b transposed") {
  Rng rng(2);
  Tensor a = randn({3, 4}, rng);
  const Tensor b = randn({4, 2}, rng, false);
  {
    GradTape tape;
    TapeScope scope(tape);
    tape.backward(sum(matmul(a, b)));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double oracle = b[j * 2] + b[j * 2 + 1];
      CHECK(std::abs(a.grad()[i * 4 + j] - oracle) < 1e-12);
    }
  }
  CHECK(max_grad_error({{a, {}}}, [&] { return sum(matmul(a, b)); }) < 1e-6);
}

TEST_CASE("matmul shape errors report both shapes") {
  const Tensor a(Shape{2, 3}), b(Shape{4, 2});
  try {
    matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2,3]") != std::string::npos);
    CHECK(msg.find("[4,2]") != std::string::npos);
  }
}

TEST_CASE("matmul is associative") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = pick(rng, 1, 5), k = pick(rng, 1, 5), n = pick(rng, 1, 5), q = pick(rng, 1, 5);
    const Tensor a = randn({m, k}, rng, false), b = randn({k, n}, rng, false), c = randn({n, q}, rng, false);
    const Tensor l = matmul(matmul(a, b), c), r = matmul(a, matmul(b, c));
    double num = 0, den = 0;
    for (std::size_t i = 0; i < l.numel(); ++i) {
      num += (l[i] - r[i]) * (l[i] - r[i]);
      den += r[i] * r[i];
    }
    CHECK(std::sqrt(num / den) < 1e-9);
  }
}

TEST_CASE("batched matmul broadcasts leading dimensions") {
  Rng rng(4);
  const Tensor a = randn({2, 3, 4}, rng, false), b = randn({4, 5}, rng, false);
  const Tensor c = matmul(a, b);
  CHECK(c.shape() == Shape{2, 3, 5});
  double direct = 0;
  for (std::size_t j = 0; j < 4; ++j) direct += a[12 + 4 + j] * b[j * 5 + 2];
  CHECK(c[15 + 5 + 2] == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("softmax examples") {
  const Tensor u = softmax_lastdim(Tensor(Shape{3}, {0, 0, 0}));
  for (double v : u.data()) CHECK(v == doctest::Approx(1.0 / 3));
  CHECK(softmax_lastdim(Tensor(Shape{1}, {7.5})).item() == 1.0);
  const Tensor big = softmax_lastdim(Tensor(Shape{2}, {1000, 0}));
  CHECK(std::isfinite(big[0]));
  CHECK(big[0] == doctest::Approx(1.0));
  CHECK(big[1] == doctest::Approx(0.0));
  CHECK(std::isnan(softmax_lastdim(Tensor(Shape{2}, {NAN, 0}))[0]));
}

TEST_CASE("softmax rows sum to one and are nonnegative") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t r = pick(rng, 1, 6), c = pick(rng, 1, 9);
    Tensor x = randn({r, c}, rng, false);
    for (double& v : x.mutable_data()) v *= 20;
    const Tensor y = softmax_lastdim(x);
    for (std::size_t i = 0; i < r; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < c; ++j) {
        CHECK(y[i * c + j] >= 0);
        s += y[i * c + j];
      }
      CHECK(std::abs(s - 1) < 1e-12);
    }
  }
}

TEST_CASE("layer_norm examples") {
  const Tensor g = Tensor::ones({2}), b = Tensor::zeros({2});
  const Tensor y = layer_norm(Tensor(Shape{2}, {1, 3}), g, b, 0.0);
  CHECK(y[0] == doctest::Approx(-1.0));
  CHECK(y[1] == doctest::Approx(1.0));
  const Tensor z = layer_norm(Tensor(Shape{3}, 4.0), Tensor::ones({3}), Tensor::zeros({3}));
  for (double v : z.data()) CHECK(v == 0.0);
}

TEST_CASE("gelu examples") {
  CHECK(gelu(Tensor::scalar(0)).item() == 0.0);
  CHECK(std::abs(gelu(Tensor::scalar(10)).item() - 10) < 1e-9);
  for (double x : {-2.0, -0.5, 0.5, 2.0}) {
    Tensor t = Tensor(Shape{1}, {x}).set_requires_grad();
    CHECK(max_grad_error({{t, {}}}, [&] { return sum(gelu(t)); }) < 1e-6);
  }
}

TEST_CASE("backward examples") {
  Tensor x = Tensor(Shape{3}, {0.3, -1, 2}).set_requires_grad();
  GradTape tape;
  {
    TapeScope scope(tape);
    tape.backward(sum(x));
  }
  for (double g : x.grad()) CHECK(g == 1.0);
  CHECK(tape.size() == 0);

  Tensor y = Tensor(Shape{2}, {1, -2}).set_requires_grad();
  {
    TapeScope scope(tape);
    tape.backward(sum(mul(y, y)));
  }
  CHECK(y.grad()[0] == 2.0);
  CHECK(y.grad()[1] == -4.0);

  {
    TapeScope scope(tape);
    CHECK_THROWS_AS(tape.backward(mul(y, y)), ContractError);
    tape.clear();
  }
}

TEST_CASE("gradients accumulate until zero_grad") {
  Tensor x = Tensor(Shape{2}, {1, 2}).set_requires_grad();
  GradTape tape;
  for (int i = 0; i < 2; ++i) {
    TapeScope scope(tape);
    tape.backward(sum(x));
  }
  CHECK(x.grad()[0] == 2.0);
  x.zero_grad();
  CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("gather_tokens examples") {
  // a, b, c as width-1 tokens 10, 20, 30
  const Tensor x(Shape{1, 3, 1}, {10, 20, 30});
  const std::vector<std::vector<std::size_t>> idx{{2, 0}};
  const Tensor y = gather_tokens(x, idx);
  CHECK(y.shape() == Shape{1, 2, 1});
  CHECK(y[0] == 30);
  CHECK(y[1] == 10);

  const std::vector<std::vector<std::size_t>> ident{{0, 1, 2}};
  const Tensor same = gather_tokens(x, ident);
  CHECK(std::equal(same.data().begin(), same.data().end(), x.data().begin()));

  const std::vector<std::vector<std::size_t>> bad{{3}};
  CHECK_THROWS_AS(gather_tokens(x, bad), IndexError);
}

TEST_CASE("gather_tokens gradient accumulates duplicates") {
  Tensor x = Tensor(Shape{1, 3, 2}, {1, 2, 3, 4, 5, 6}).set_requires_grad();
  const std::vector<std::vector<std::size_t>> idx{{1, 1, 0}};
  {
    GradTape tape;
    TapeScope scope(tape);
    tape.backward(sum(gather_tokens(x, idx)));
  }
  CHECK(std::vector<double>(x.grad().begin(), x.grad().end()) == std::vector<double>{1, 1, 2, 2, 0, 0});
  Rng rng(6);
  const Tensor w = randn({1, 3, 2}, rng, false);
  CHECK(max_grad_error({{x, {}}}, [&] { return sum(mul(gather_tokens(x, idx), w)); }) < 1e-4);
}

TEST_CASE("every differentiable op passes randomized finite-difference checks") {
  Rng rng(7);
  double worst = 0;
  int worst_line = 0;
  auto track = [&](int line, double e) {
    if (e > worst) {
      worst = e;
      worst_line = line;
    }
  };
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t b = pick(rng, 1, 3), r = pick(rng, 1, 4), c = pick(rng, 2, 5), k = pick(rng, 1, 4);
    Tensor a = randn({b, r, c}, rng), m = randn({c, k}, rng), v = randn({c}, rng), s = randn({b, r, c}, rng);
    Tensor g = randn({c}, rng), be = randn({c}, rng);
    const Tensor w = randn({b, r, k}, rng, false), w2 = randn({b, r, c}, rng, false);
    track(__LINE__, max_grad_error({{a, {}}, {m, {}}}, [&] { return sum(mul(matmul(a, m), w)); }));
    track(__LINE__, max_grad_error({{a, {}}, {v, {}}}, [&] { return sum(mul(add(a, v), w2)); }));
    track(__LINE__, max_grad_error({{a, {}}, {s, {}}}, [&] { return sum(mul(sub(a, s), w2)); }));
    track(__LINE__, max_grad_error({{a, {}}, {s, {}}}, [&] { return sum(mul(mul(a, s), w2)); }));
    track(__LINE__, max_grad_error({{a, {}}}, [&] { return mean(square(scale(add_scalar(a, 0.3), 1.7))); }));
    track(__LINE__, max_grad_error({{a, {}}}, [&] { return sum(mul(softmax_lastdim(a), w2)); }));
    track(__LINE__, max_grad_error({{a, {}}, {g, {}}, {be, {}}},
                                           [&] { return sum(mul(layer_norm(a, g, be), w2)); }));
    track(__LINE__, max_grad_error({{a, {}}}, [&] { return sum(mul(gelu(a), w2)); }));
    track(__LINE__, max_grad_error({{a, {}}}, [&] { return sum(mul(softplus(a), w2)); }));
    track(__LINE__, max_grad_error({{a, {}}}, [&] {
      return sum(mul(permute(a, {2, 0, 1}), permute(w2, {2, 0, 1})));
    }));
    const Tensor wt = randn({b, c, r}, rng, false);
    track(__LINE__, max_grad_error({{a, {}}}, [&] { return sum(mul(transpose_last2(a), wt)); }));
    track(__LINE__, max_grad_error({{a, {}}, {s, {}}}, [&] { return sum(mul(concat(a, s, 1), concat(w2, w2, 1))); }));
    track(__LINE__, max_grad_error({{v, {}}}, [&] { return sum(mul(broadcast_to(v, {b, r, c}), w2)); }));
  }
  INFO("worst op check at line " << worst_line);
  CHECK(worst < 1e-4);
}

TEST_CASE("patchify and unpatchify are inverse and differentiable") {
  Rng rng(8);
  Tensor x = randn({2, 3, 4, 6}, rng);
  const Tensor p = patchify(x, 2);
  CHECK(p.shape() == Shape{2, 6, 12});
  const Tensor back = unpatchify(p, 3, 4, 6, 2);
  CHECK(std::equal(back.data().begin(), back.data().end(), x.data().begin()));
  // token 4 = patch row 1, col 1; feature (c=1, di=0, dj=1) -> x[0,1,2,3]
  CHECK(p[4 * 12 + 1 * 4 + 1] == x[(1 * 4 + 2) * 6 + 3]);
  const Tensor w = randn(p.shape(), rng, false);
  CHECK(max_grad_error({{x, {}}}, [&] { return sum(mul(patchify(x, 2), w)); }) < 1e-6);
}

TEST_CASE("drop_path is identity in eval mode and rescales survivors in training") {
  Rng rng(9);
  const Tensor x = randn({200, 2, 3}, rng, false);
  const Tensor e = drop_path(x, 0.3, false, rng);
  CHECK(std::equal(e.data().begin(), e.data().end(), x.data().begin()));
  const Tensor t = drop_path(x, 0.5, true, rng);
  std::size_t dropped = 0;
  for (std::size_t b = 0; b < 200; ++b) {
    const double r = t[b * 6] / x[b * 6];
    if (t[b * 6] == 0) {
      ++dropped;
    } else {
      CHECK(r == doctest::Approx(2.0));
    }
  }
  CHECK(dropped > 60);
  CHECK(dropped < 140);
}
