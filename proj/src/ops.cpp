#include "cext/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cext/error.hpp"

namespace cext {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;
using ImplPtr = std::shared_ptr<Tensor::Impl>;

bool wants_grad(std::initializer_list<const Tensor*> inputs) {
  if (active_tape() == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// Marks `out` as differentiable and records `fn` on the active tape.
template <typename Fn>
void record(Tensor& out, Fn&& fn) {
  out.set_requires_grad(true);
  active_tape()->record(std::forward<Fn>(fn));
}

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

void check_suffix(const Tensor& a, const Tensor& b, const char* op) {
  if (!is_suffix(b.shape(), a.shape())) {
    throw DimensionError(std::string(op) + ": shape " + shape_str(b.shape()) +
                         " does not broadcast onto " + shape_str(a.shape()));
  }
}

// Pure index-remapping op: out[i] = x[src[i]]. Backward scatters additively.
Tensor remap(const Tensor& x, Shape out_shape, std::vector<std::size_t> src) {
  const double* xd = x.data().data();
  Tensor out = Tensor::uninitialized(std::move(out_shape));
  double* od = out.mutable_data().data();
  for (std::size_t i = 0; i < src.size(); ++i) od[i] = xd[src[i]];
  if (wants_grad({&x})) {
    auto index = std::make_shared<std::vector<std::size_t>>(std::move(src));
    record(out, [xi = x.impl(), oi = out.impl(), index] {
      if (oi->grad.empty() || !xi->requires_grad) return;
      auto& gx = xi->ensure_grad();
      const auto& go = oi->grad;
      for (std::size_t i = 0; i < index->size(); ++i) gx[(*index)[i]] += go[i];
    });
  }
  return out;
}

std::size_t norm_axis(int axis, std::size_t ndim) {
  const int n = static_cast<int>(ndim);
  const int a = axis < 0 ? axis + n : axis;
  if (a < 0 || a >= n) throw IndexError("axis " + std::to_string(axis) + " out of range");
  return static_cast<std::size_t>(a);
}

}  // namespace

// ---------------------------------------------------------------- matmul

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() < 2 || b.ndim() < 2) {
    throw DimensionError("matmul needs rank >= 2 operands, got " +
                         shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  const std::size_t m = a.dim(-2), k = a.dim(-1), k2 = b.dim(-2), n = b.dim(-1);
  if (k != k2) {
    throw DimensionError("matmul inner dimensions differ: " + shape_str(a.shape()) +
                         " x " + shape_str(b.shape()));
  }
  const Shape abatch(a.shape().begin(), a.shape().end() - 2);
  const Shape bbatch(b.shape().begin(), b.shape().end() - 2);
  const std::size_t nb = std::max(abatch.size(), bbatch.size());
  Shape batch(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const std::size_t da = i + abatch.size() >= nb ? abatch[i + abatch.size() - nb] : 1;
    const std::size_t db = i + bbatch.size() >= nb ? bbatch[i + bbatch.size() - nb] : 1;
    if (da != db && da != 1 && db != 1) {
      throw DimensionError("matmul batch dimensions do not broadcast: " +
                           shape_str(a.shape()) + " x " + shape_str(b.shape()));
    }
    batch[i] = std::max(da, db);
  }
  const std::size_t total = shape_numel(batch);
  // Per output batch: offsets (in matrices) into a and b.
  std::vector<std::size_t> aoff(total), boff(total);
  {
    std::vector<std::size_t> idx(nb, 0);
    for (std::size_t t = 0; t < total; ++t) {
      std::size_t ao = 0, bo = 0;
      for (std::size_t i = 0; i < nb; ++i) {
        if (i + abatch.size() >= nb) {
          const std::size_t d = abatch[i + abatch.size() - nb];
          ao = ao * d + (d == 1 ? 0 : idx[i]);
        }
        if (i + bbatch.size() >= nb) {
          const std::size_t d = bbatch[i + bbatch.size() - nb];
          bo = bo * d + (d == 1 ? 0 : idx[i]);
        }
      }
      aoff[t] = ao;
      boff[t] = bo;
      for (std::size_t i = nb; i-- > 0;) {
        if (++idx[i] < batch[i]) break;
        idx[i] = 0;
      }
    }
  }
  Shape out_shape = batch;
  out_shape.push_back(m);
  out_shape.push_back(n);
  Tensor out = Tensor::uninitialized(out_shape);

  // b without batch dims: one GEMM over the folded leading axes of a.
  const bool fold = shape_numel(bbatch) == 1 && shape_numel(abatch) == total;
  const double* ad = a.data().data();
  const double* bd = b.data().data();
  double* od = out.mutable_data().data();
  if (fold) {
    MutMap(od, total * m, n).noalias() = ConstMap(ad, total * m, k) * ConstMap(bd, k, n);
  } else {
    for (std::size_t t = 0; t < total; ++t) {
      MutMap(od + t * m * n, m, n).noalias() =
          ConstMap(ad + aoff[t] * m * k, m, k) * ConstMap(bd + boff[t] * k * n, k, n);
    }
  }

  if (wants_grad({&a, &b})) {
    auto offsets = std::make_shared<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>(
        std::move(aoff), std::move(boff));
    record(out, [ai = a.impl(), bi = b.impl(), oi = out.impl(), offsets, total, m, k, n, fold] {
      if (oi->grad.empty()) return;
      const double* go = oi->grad.data();
      const double* ad = ai->data.data();
      const double* bd = bi->data.data();
      if (fold) {
        if (ai->requires_grad) {
          MutMap(ai->ensure_grad().data(), total * m, k).noalias() +=
              ConstMap(go, total * m, n) * ConstMap(bd, k, n).transpose();
        }
        if (bi->requires_grad) {
          MutMap(bi->ensure_grad().data(), k, n).noalias() +=
              ConstMap(ad, total * m, k).transpose() * ConstMap(go, total * m, n);
        }
        return;
      }
      const auto& [ao, bo] = *offsets;
      double* ga = ai->requires_grad ? ai->ensure_grad().data() : nullptr;
      double* gb = bi->requires_grad ? bi->ensure_grad().data() : nullptr;
      for (std::size_t t = 0; t < total; ++t) {
        const ConstMap g(go + t * m * n, m, n);
        if (ga) {
          MutMap(ga + ao[t] * m * k, m, k).noalias() +=
              g * ConstMap(bd + bo[t] * k * n, k, n).transpose();
        }
        if (gb) {
          MutMap(gb + bo[t] * k * n, k, n).noalias() +=
              ConstMap(ad + ao[t] * m * k, m, k).transpose() * g;
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------- elementwise

Tensor add(const Tensor& a, const Tensor& b) {
  check_suffix(a, b, "add");
  const auto ad = a.data();
  const auto bd = b.data();
  const std::size_t nb = bd.size();
  Tensor out = Tensor::uninitialized(a.shape());
  auto od = out.mutable_data();
  for (std::size_t o = 0; o < ad.size(); o += nb)
    for (std::size_t j = 0; j < nb; ++j) od[o + j] = ad[o + j] + bd[j];
  if (wants_grad({&a, &b})) {
    record(out, [ai = a.impl(), bi = b.impl(), oi = out.impl()] {
      if (oi->grad.empty()) return;
      const auto& go = oi->grad;
      if (ai->requires_grad) {
        auto& ga = ai->ensure_grad();
        for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
      }
      if (bi->requires_grad) {
        auto& gb = bi->ensure_grad();
        const std::size_t nb = gb.size();
        for (std::size_t o = 0; o < go.size(); o += nb)
          for (std::size_t j = 0; j < nb; ++j) gb[j] += go[o + j];
      }
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_suffix(a, b, "sub");
  const auto ad = a.data();
  const auto bd = b.data();
  const std::size_t nb = bd.size();
  Tensor out = Tensor::uninitialized(a.shape());
  auto od = out.mutable_data();
  for (std::size_t o = 0; o < ad.size(); o += nb)
    for (std::size_t j = 0; j < nb; ++j) od[o + j] = ad[o + j] - bd[j];
  if (wants_grad({&a, &b})) {
    record(out, [ai = a.impl(), bi = b.impl(), oi = out.impl()] {
      if (oi->grad.empty()) return;
      const auto& go = oi->grad;
      if (ai->requires_grad) {
        auto& ga = ai->ensure_grad();
        for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
      }
      if (bi->requires_grad) {
        auto& gb = bi->ensure_grad();
        const std::size_t nb = gb.size();
        for (std::size_t o = 0; o < go.size(); o += nb)
          for (std::size_t j = 0; j < nb; ++j) gb[j] -= go[o + j];
      }
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_suffix(a, b, "mul");
  const auto ad = a.data();
  const auto bd = b.data();
  const std::size_t nb = bd.size();
  Tensor out = Tensor::uninitialized(a.shape());
  auto od = out.mutable_data();
  for (std::size_t o = 0; o < ad.size(); o += nb)
    for (std::size_t j = 0; j < nb; ++j) od[o + j] = ad[o + j] * bd[j];
  if (wants_grad({&a, &b})) {
    record(out, [ai = a.impl(), bi = b.impl(), oi = out.impl()] {
      if (oi->grad.empty()) return;
      const auto& go = oi->grad;
      const std::size_t nb = bi->data.size();
      if (ai->requires_grad) {
        auto& ga = ai->ensure_grad();
        const auto& bd = bi->data;
        for (std::size_t o = 0; o < go.size(); o += nb)
          for (std::size_t j = 0; j < nb; ++j) ga[o + j] += go[o + j] * bd[j];
      }
      if (bi->requires_grad) {
        auto& gb = bi->ensure_grad();
        const auto& ad = ai->data;
        for (std::size_t o = 0; o < go.size(); o += nb)
          for (std::size_t j = 0; j < nb; ++j) gb[j] += go[o + j] * ad[o + j];
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& a, double factor) {
  const auto ad = a.data();
  Tensor out = Tensor::uninitialized(a.shape());
  auto od = out.mutable_data();
  for (std::size_t i = 0; i < ad.size(); ++i) od[i] = ad[i] * factor;
  if (wants_grad({&a})) {
    record(out, [ai = a.impl(), oi = out.impl(), factor] {
      if (oi->grad.empty()) return;
      auto& ga = ai->ensure_grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += oi->grad[i] * factor;
    });
  }
  return out;
}

Tensor add_scalar(const Tensor& a, double value) {
  const auto ad = a.data();
  Tensor out = Tensor::uninitialized(a.shape());
  auto od = out.mutable_data();
  for (std::size_t i = 0; i < ad.size(); ++i) od[i] = ad[i] + value;
  if (wants_grad({&a})) {
    record(out, [ai = a.impl(), oi = out.impl()] {
      if (oi->grad.empty()) return;
      auto& ga = ai->ensure_grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += oi->grad[i];
    });
  }
  return out;
}

Tensor square(const Tensor& a) {
  const auto ad = a.data();
  Tensor out = Tensor::uninitialized(a.shape());
  auto od = out.mutable_data();
  for (std::size_t i = 0; i < ad.size(); ++i) od[i] = ad[i] * ad[i];
  if (wants_grad({&a})) {
    record(out, [ai = a.impl(), oi = out.impl()] {
      if (oi->grad.empty()) return;
      auto& ga = ai->ensure_grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += 2.0 * ai->data[i] * oi->grad[i];
    });
  }
  return out;
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  Tensor out = Tensor::scalar(s);
  if (wants_grad({&a})) {
    record(out, [ai = a.impl(), oi = out.impl()] {
      if (oi->grad.empty()) return;
      const double g = oi->grad[0];
      for (double& v : ai->ensure_grad()) v += g;
    });
  }
  return out;
}

Tensor mean(const Tensor& a) {
  return scale(sum(a), 1.0 / static_cast<double>(std::max<std::size_t>(a.numel(), 1)));
}

// ------------------------------------------------------- normalisations

Tensor softmax_lastdim(const Tensor& x) {
  if (x.ndim() == 0 || x.dim(-1) == 0) {
    throw DimensionError("softmax needs a non-empty last dimension, got " +
                         shape_str(x.shape()));
  }
  const std::size_t n = x.dim(-1);
  const std::size_t rows = x.numel() / n;
  const auto xd = x.data();
  Tensor out = Tensor::uninitialized(x.shape());
  auto od = out.mutable_data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xd.data() + r * n;
    double* yr = od.data() + r * n;
    double mx = -std::numeric_limits<double>::infinity();
    bool nan = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::isnan(xr[j])) nan = true;
      mx = std::max(mx, xr[j]);
    }
    if (nan) {
      std::fill(yr, yr + n, std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      s += yr[j];
    }
    for (std::size_t j = 0; j < n; ++j) yr[j] /= s;
  }
  if (wants_grad({&x})) {
    record(out, [xi = x.impl(), oi = out.impl(), n, rows] {
      if (oi->grad.empty()) return;
      auto& gx = xi->ensure_grad();
      const auto& y = oi->data;
      const auto& gy = oi->grad;
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t o = r * n;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += gy[o + j] * y[o + j];
        for (std::size_t j = 0; j < n; ++j) gx[o + j] += y[o + j] * (gy[o + j] - dot);
      }
    });
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const std::size_t n = x.dim(-1);
  if (gamma.numel() != n || beta.numel() != n) {
    throw DimensionError("layer_norm affine parameters " + shape_str(gamma.shape()) +
                         "/" + shape_str(beta.shape()) + " do not match last dim of " +
                         shape_str(x.shape()));
  }
  const std::size_t rows = x.numel() / n;
  const auto xd = x.data();
  const auto gd = gamma.data();
  const auto bd = beta.data();
  auto xhat = std::make_shared<std::vector<double>>(x.numel());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  Tensor out = Tensor::uninitialized(x.shape());
  auto od = out.mutable_data();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t o = r * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += xd[o + j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (xd[o + j] - mu) * (xd[o + j] - mu);
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (std::size_t j = 0; j < n; ++j) {
      const double h = (xd[o + j] - mu) * is;
      (*xhat)[o + j] = h;
      od[o + j] = h * gd[j] + bd[j];
    }
  }
  if (wants_grad({&x, &gamma, &beta})) {
    record(out, [xi = x.impl(), gi = gamma.impl(), bi = beta.impl(), oi = out.impl(), xhat,
                 inv_std, n, rows] {
      if (oi->grad.empty()) return;
      const auto& gy = oi->grad;
      if (gi->requires_grad || bi->requires_grad) {
        auto& gg = gi->ensure_grad();
        auto& gb = bi->ensure_grad();
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < n; ++j) {
            gg[j] += gy[r * n + j] * (*xhat)[r * n + j];
            gb[j] += gy[r * n + j];
          }
        }
      }
      if (xi->requires_grad) {
        auto& gx = xi->ensure_grad();
        const auto& g = gi->data;
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t r = 0; r < rows; ++r) {
          const std::size_t o = r * n;
          double m1 = 0.0, m2 = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            const double dh = gy[o + j] * g[j];
            m1 += dh;
            m2 += dh * (*xhat)[o + j];
          }
          m1 *= inv_n;
          m2 *= inv_n;
          for (std::size_t j = 0; j < n; ++j) {
            const double dh = gy[o + j] * g[j];
            gx[o + j] += (*inv_std)[r] * (dh - m1 - (*xhat)[o + j] * m2);
          }
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------- activations

Tensor gelu(const Tensor& x) {
  const auto xd = x.data();
  Tensor out = Tensor::uninitialized(x.shape());
  auto od = out.mutable_data();
  const bool grad = wants_grad({&x});
  // d gelu / dx, filled during the forward pass.
  auto slope = grad ? std::make_shared<std::vector<double>>(xd.size()) : nullptr;
  const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
  for (std::size_t i = 0; i < xd.size(); ++i) {
    const double v = xd[i];
    const double cdf = 0.5 * std::erfc(-v * std::numbers::sqrt2 / 2.0);
    od[i] = v * cdf;
    if (grad) (*slope)[i] = cdf + v * inv_sqrt_2pi * std::exp(-0.5 * v * v);
  }
  if (grad) {
    record(out, [xi = x.impl(), oi = out.impl(), slope] {
      if (oi->grad.empty()) return;
      auto& gx = xi->ensure_grad();
      const auto& go = oi->grad;
      const auto& d = *slope;
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i] * d[i];
    });
  }
  return out;
}

Tensor softplus(const Tensor& x) {
  const auto xd = x.data();
  Tensor out = Tensor::uninitialized(x.shape());
  auto od = out.mutable_data();
  for (std::size_t i = 0; i < xd.size(); ++i) {
    const double v = xd[i];
    od[i] = std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
  }
  if (wants_grad({&x})) {
    record(out, [xi = x.impl(), oi = out.impl()] {
      if (oi->grad.empty()) return;
      auto& gx = xi->ensure_grad();
      for (std::size_t i = 0; i < gx.size(); ++i) {
        const double v = xi->data[i];
        const double sig = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
        gx[i] += oi->grad[i] * sig;
      }
    });
  }
  return out;
}

// -------------------------------------------------------------- layout

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("cannot reshape " + shape_str(x.shape()) + " to " + shape_str(shape));
  }
  Tensor out = Tensor::uninitialized(std::move(shape));
  std::copy(x.data().begin(), x.data().end(), out.mutable_data().begin());
  if (wants_grad({&x})) {
    record(out, [xi = x.impl(), oi = out.impl()] {
      if (oi->grad.empty()) return;
      auto& gx = xi->ensure_grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += oi->grad[i];
    });
  }
  return out;
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes) {
  const std::size_t nd = x.ndim();
  if (axes.size() != nd) {
    throw DimensionError("permute: " + std::to_string(axes.size()) + " axes for rank " +
                         std::to_string(nd));
  }
  std::vector<bool> seen(nd, false);
  for (std::size_t a : axes) {
    if (a >= nd || seen[a]) throw DimensionError("permute: axes are not a permutation");
    seen[a] = true;
  }
  const Shape& in = x.shape();
  std::vector<std::size_t> in_stride(nd, 1);
  for (std::size_t i = nd; i-- > 1;) in_stride[i - 1] = in_stride[i] * in[i];
  Shape out_shape(nd);
  for (std::size_t i = 0; i < nd; ++i) out_shape[i] = in[axes[i]];
  // Trailing axes left in place form contiguous runs copied whole.
  std::size_t keep = nd, run = 1;
  while (keep > 0 && axes[keep - 1] == keep - 1) run *= in[--keep];
  const std::size_t runs = run ? x.numel() / run : 0;
  auto base = std::make_shared<std::vector<std::size_t>>(runs);
  std::vector<std::size_t> idx(keep, 0);
  for (std::size_t o = 0; o < runs; ++o) {
    std::size_t s = 0;
    for (std::size_t i = 0; i < keep; ++i) s += idx[i] * in_stride[axes[i]];
    (*base)[o] = s;
    for (std::size_t i = keep; i-- > 0;) {
      if (++idx[i] < out_shape[i]) break;
      idx[i] = 0;
    }
  }
  Tensor out = Tensor::uninitialized(std::move(out_shape));
  const double* xd = x.data().data();
  double* od = out.mutable_data().data();
  for (std::size_t o = 0; o < runs; ++o) std::copy_n(xd + (*base)[o], run, od + o * run);
  if (wants_grad({&x})) {
    record(out, [xi = x.impl(), oi = out.impl(), base, run] {
      if (oi->grad.empty() || !xi->requires_grad) return;
      double* gx = xi->ensure_grad().data();
      const double* go = oi->grad.data();
      for (std::size_t o = 0; o < base->size(); ++o) {
        double* g = gx + (*base)[o];
        const double* src = go + o * run;
        for (std::size_t j = 0; j < run; ++j) g[j] += src[j];
      }
    });
  }
  return out;
}

Tensor transpose_last2(const Tensor& x) {
  if (x.ndim() < 2) throw DimensionError("transpose_last2 needs rank >= 2");
  std::vector<std::size_t> axes(x.ndim());
  for (std::size_t i = 0; i < axes.size(); ++i) axes[i] = i;
  std::swap(axes[axes.size() - 1], axes[axes.size() - 2]);
  return permute(x, axes);
}

Tensor gather_tokens(const Tensor& x, std::span<const std::vector<std::size_t>> indices) {
  if (x.ndim() != 3) throw DimensionError("gather_tokens expects [B,L,D], got " + shape_str(x.shape()));
  const std::size_t batch = x.dim(0), len = x.dim(1), d = x.dim(2);
  if (indices.size() != batch) {
    throw DimensionError("gather_tokens: " + std::to_string(indices.size()) +
                         " index rows for batch " + std::to_string(batch));
  }
  const std::size_t sel = batch ? indices[0].size() : 0;
  std::vector<std::size_t> src;
  src.reserve(batch * sel * d);
  for (std::size_t b = 0; b < batch; ++b) {
    if (indices[b].size() != sel) throw DimensionError("gather_tokens: ragged index rows");
    for (std::size_t i : indices[b]) {
      if (i >= len) {
        throw IndexError("gather_tokens: index " + std::to_string(i) +
                         " out of range for length " + std::to_string(len));
      }
      for (std::size_t j = 0; j < d; ++j) src.push_back((b * len + i) * d + j);
    }
  }
  return remap(x, Shape{batch, sel, d}, std::move(src));
}

Tensor concat(const Tensor& a, const Tensor& b, int axis) {
  const std::size_t ax = norm_axis(axis, a.ndim());
  if (a.ndim() != b.ndim()) throw DimensionError("concat: rank mismatch");
  for (std::size_t i = 0; i < a.ndim(); ++i) {
    if (i != ax && a.shape()[i] != b.shape()[i]) {
      throw DimensionError("concat: " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                           " differ off the concat axis");
    }
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < ax; ++i) outer *= a.shape()[i];
  for (std::size_t i = ax + 1; i < a.ndim(); ++i) inner *= a.shape()[i];
  const std::size_t ca = a.shape()[ax] * inner, cb = b.shape()[ax] * inner;
  Shape shape = a.shape();
  shape[ax] += b.shape()[ax];
  Tensor out = Tensor::uninitialized(shape);
  auto od = out.mutable_data();
  const auto ad = a.data();
  const auto bd = b.data();
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(ad.data() + o * ca, ca, od.data() + o * (ca + cb));
    std::copy_n(bd.data() + o * cb, cb, od.data() + o * (ca + cb) + ca);
  }
  if (wants_grad({&a, &b})) {
    record(out, [ai = a.impl(), bi = b.impl(), oi = out.impl(), outer, ca, cb] {
      if (oi->grad.empty()) return;
      const auto& go = oi->grad;
      if (ai->requires_grad) {
        auto& ga = ai->ensure_grad();
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t j = 0; j < ca; ++j) ga[o * ca + j] += go[o * (ca + cb) + j];
      }
      if (bi->requires_grad) {
        auto& gb = bi->ensure_grad();
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t j = 0; j < cb; ++j) gb[o * cb + j] += go[o * (ca + cb) + ca + j];
      }
    });
  }
  return out;
}

Tensor broadcast_to(const Tensor& x, Shape shape) {
  if (!is_suffix(x.shape(), shape)) {
    throw DimensionError("cannot broadcast " + shape_str(x.shape()) + " to " + shape_str(shape));
  }
  const std::size_t n = x.numel();
  std::vector<std::size_t> src(shape_numel(shape));
  for (std::size_t i = 0; i < src.size(); ++i) src[i] = i % n;
  return remap(x, std::move(shape), std::move(src));
}

Tensor drop_path(const Tensor& x, double rate, bool training, Rng& rng) {
  if (!training || rate <= 0.0 || x.ndim() == 0) return x;
  if (rate >= 1.0) throw ConfigError("drop_path rate must be < 1");
  const std::size_t batch = x.dim(0);
  const std::size_t per = x.numel() / std::max<std::size_t>(batch, 1);
  std::vector<double> keep(x.numel());
  std::bernoulli_distribution survive(1.0 - rate);
  for (std::size_t b = 0; b < batch; ++b) {
    const double f = survive(rng) ? 1.0 / (1.0 - rate) : 0.0;
    std::fill_n(keep.begin() + static_cast<std::ptrdiff_t>(b * per), per, f);
  }
  return mul(x, Tensor(x.shape(), std::move(keep)));
}

Tensor patchify(const Tensor& x, std::size_t patch) {
  if (x.ndim() != 4) throw DimensionError("patchify expects [B,C,M,K], got " + shape_str(x.shape()));
  const std::size_t batch = x.dim(0), ch = x.dim(1), rows = x.dim(2), cols = x.dim(3);
  if (patch == 0 || rows % patch || cols % patch) {
    throw DimensionError("grid " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " is not divisible by patch size " + std::to_string(patch));
  }
  const std::size_t gr = rows / patch, gc = cols / patch, feat = ch * patch * patch;
  std::vector<std::size_t> src;
  src.reserve(x.numel());
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t pi = 0; pi < gr; ++pi)
      for (std::size_t pj = 0; pj < gc; ++pj)
        for (std::size_t c = 0; c < ch; ++c)
          for (std::size_t di = 0; di < patch; ++di)
            for (std::size_t dj = 0; dj < patch; ++dj)
              src.push_back(((b * ch + c) * rows + pi * patch + di) * cols + pj * patch + dj);
  return remap(x, Shape{batch, gr * gc, feat}, std::move(src));
}

Tensor unpatchify(const Tensor& tokens, std::size_t channels, std::size_t rows,
                  std::size_t cols, std::size_t patch) {
  if (tokens.ndim() != 3 || patch == 0 || rows % patch || cols % patch) {
    throw DimensionError("unpatchify: bad token shape " + shape_str(tokens.shape()));
  }
  const std::size_t batch = tokens.dim(0), gr = rows / patch, gc = cols / patch;
  const std::size_t feat = channels * patch * patch;
  if (tokens.dim(1) != gr * gc || tokens.dim(2) != feat) {
    throw DimensionError("unpatchify: tokens " + shape_str(tokens.shape()) +
                         " do not tile a " + std::to_string(channels) + "x" +
                         std::to_string(rows) + "x" + std::to_string(cols) + " grid");
  }
  std::vector<std::size_t> src(tokens.numel());
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
          const std::size_t tok = (i / patch) * gc + j / patch;
          const std::size_t f = (c * patch + i % patch) * patch + j % patch;
          src[((b * channels + c) * rows + i) * cols + j] = (b * gr * gc + tok) * feat + f;
        }
  return remap(tokens, Shape{batch, channels, rows, cols}, std::move(src));
}

}  // namespace cext
