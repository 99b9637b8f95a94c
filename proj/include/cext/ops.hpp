#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cext/rng.hpp"
#include "cext/tensor.hpp"

// Differentiable tensor operations. Every op returns a new tensor and, when a
// tape is active and some input requires a gradient, records its backward
// rule on that tape.
namespace cext {

/// Batched matrix product of [..., m, k] and [..., k, n]; leading batch
/// dimensions broadcast numpy-style.
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise binary ops. `b` must have the same shape as `a` or a shape
// equal to a trailing suffix of a's shape (bias vectors, positional tables).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);
Tensor square(const Tensor& a);

/// Sum of all entries, as a scalar tensor.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// Softmax over the last axis with max subtraction. NaN inputs propagate.
Tensor softmax_lastdim(const Tensor& x);

/// Normalises each row over the last axis, then applies gamma/beta.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);

/// Exact GELU, x * Phi(x).
Tensor gelu(const Tensor& x);

/// log(1 + exp(x)), evaluated stably.
Tensor softplus(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes);
Tensor transpose_last2(const Tensor& x);

/// out[b, i, :] = x[b, indices[b][i], :]. Gradients scatter back additively,
/// so repeated indices accumulate.
Tensor gather_tokens(const Tensor& x,
                     std::span<const std::vector<std::size_t>> indices);

/// Concatenation along `axis` (negative counts from the back).
Tensor concat(const Tensor& a, const Tensor& b, int axis);

/// Repeats `x` over new leading dimensions; x's shape must be a suffix of
/// `shape`.
Tensor broadcast_to(const Tensor& x, Shape shape);

/// Stochastic depth on a residual branch: each leading-axis sample is zeroed
/// with probability `rate` and the survivors are scaled by 1/(1-rate).
/// Identity when `training` is false or rate is zero.
Tensor drop_path(const Tensor& x, double rate, bool training, Rng& rng);

/// [B, C, M, K] -> [B, (M/p)(K/p), C*p*p]. Token order is row-major over the
/// patch grid; features within a token are ordered (channel, row, column).
Tensor patchify(const Tensor& x, std::size_t patch);

/// Inverse of patchify.
Tensor unpatchify(const Tensor& tokens, std::size_t channels, std::size_t rows,
                  std::size_t cols, std::size_t patch);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

}  // namespace cext
