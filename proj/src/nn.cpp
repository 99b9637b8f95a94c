#include "cext/nn.hpp"

#include <cmath>

#include "cext/error.hpp"

namespace cext {
namespace {

Tensor xavier(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  std::vector<double> w(in * out);
  for (double& v : w) v = uniform(rng, -bound, bound);
  return Tensor(Shape{in, out}, std::move(w)).set_requires_grad();
}

}  // namespace

Linear Linear::init(std::size_t in, std::size_t out, Rng& rng, bool with_bias) {
  Linear l;
  l.weight = xavier(in, out, rng);
  if (with_bias) l.bias = Tensor::zeros(Shape{out}).set_requires_grad();
  return l;
}

Tensor Linear::forward(const Tensor& x) const {
  Tensor y = matmul(x, weight);
  return has_bias() ? add(y, bias) : y;
}

void Linear::collect(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".weight", weight, true});
  if (has_bias()) out.push_back({prefix + ".bias", bias, false});
}

LayerNorm LayerNorm::init(std::size_t width, double eps) {
  LayerNorm ln;
  ln.gamma = Tensor::ones(Shape{width}).set_requires_grad();
  ln.beta = Tensor::zeros(Shape{width}).set_requires_grad();
  ln.eps = eps;
  return ln;
}

void LayerNorm::collect(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".gamma", gamma, false});
  out.push_back({prefix + ".beta", beta, false});
}

MultiHeadAttention MultiHeadAttention::init(std::size_t width, std::size_t heads, Rng& rng) {
  if (heads == 0 || width % heads) {
    throw ConfigError("width " + std::to_string(width) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
  MultiHeadAttention a;
  a.heads = heads;
  a.wq = xavier(width, width, rng);
  a.wk = xavier(width, width, rng);
  a.wv = xavier(width, width, rng);
  a.wo = xavier(width, width, rng);
  return a;
}

Tensor MultiHeadAttention::forward(const Tensor& query_src, const Tensor& kv_src) const {
  if (query_src.ndim() != 3 || kv_src.ndim() != 3 || query_src.dim(0) != kv_src.dim(0) ||
      query_src.dim(2) != kv_src.dim(2)) {
    throw DimensionError("attention inputs " + shape_str(query_src.shape()) + " and " +
                         shape_str(kv_src.shape()) + " are incompatible");
  }
  const std::size_t batch = query_src.dim(0), lq = query_src.dim(1), lk = kv_src.dim(1);
  const std::size_t width = query_src.dim(2), dh = width / heads;
  auto split = [&](const Tensor& t, std::size_t len) {
    return permute(reshape(t, Shape{batch, len, heads, dh}), {0, 2, 1, 3});
  };
  const Tensor q = split(matmul(query_src, wq), lq);
  const Tensor k = split(matmul(kv_src, wk), lk);
  const Tensor v = split(matmul(kv_src, wv), lk);
  const Tensor scores = scale(matmul(q, transpose_last2(k)), 1.0 / std::sqrt(static_cast<double>(dh)));
  const Tensor ctx = matmul(softmax_lastdim(scores), v);  // [B,H,Lq,dh]
  const Tensor merged = reshape(permute(ctx, {0, 2, 1, 3}), Shape{batch, lq, width});
  return matmul(merged, wo);
}

void MultiHeadAttention::collect(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".wq", wq, true});
  out.push_back({prefix + ".wk", wk, true});
  out.push_back({prefix + ".wv", wv, true});
  out.push_back({prefix + ".wo", wo, true});
}

FeedForward FeedForward::init(std::size_t width, std::size_t hidden, Rng& rng) {
  return FeedForward{Linear::init(width, hidden, rng), Linear::init(hidden, width, rng)};
}

void FeedForward::collect(ParamList& out, const std::string& prefix) const {
  fc1.collect(out, prefix + ".fc1");
  fc2.collect(out, prefix + ".fc2");
}

TransformerBlock TransformerBlock::init(std::size_t width, std::size_t heads,
                                        std::size_t ffn_ratio, Rng& rng, double ln_eps) {
  TransformerBlock b;
  b.ln1 = LayerNorm::init(width, ln_eps);
  b.ln2 = LayerNorm::init(width, ln_eps);
  b.attn = MultiHeadAttention::init(width, heads, rng);
  b.ffn = FeedForward::init(width, width * ffn_ratio, rng);
  return b;
}

Tensor TransformerBlock::forward_pre_norm(const Tensor& x, double drop_rate, bool training,
                                          Rng& rng) const {
  const Tensor h = add(x, drop_path(attn.self_attention(ln1.forward(x)), drop_rate, training, rng));
  return add(h, drop_path(ffn.forward(ln2.forward(h)), drop_rate, training, rng));
}

Tensor TransformerBlock::forward_post_norm(const Tensor& y) const {
  const Tensor h = ln1.forward(add(y, attn.self_attention(y)));
  return ln2.forward(add(h, ffn.forward(h)));
}

void TransformerBlock::collect(ParamList& out, const std::string& prefix) const {
  ln1.collect(out, prefix + ".ln1");
  attn.collect(out, prefix + ".attn");
  ln2.collect(out, prefix + ".ln2");
  ffn.collect(out, prefix + ".ffn");
}

}  // namespace cext
