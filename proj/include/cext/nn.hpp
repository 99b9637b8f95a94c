#pragma once

#include <string>
#include <vector>

#include "cext/ops.hpp"

namespace cext {

struct NamedParam {
  std::string name;
  Tensor tensor;
  bool decay = true;  // subject to weight decay
};
using ParamList = std::vector<NamedParam>;

/// y = x W + b with W stored [in, out].
struct Linear {
  Tensor weight;
  Tensor bias;  // empty shape when the layer has no bias

  static Linear init(std::size_t in, std::size_t out, Rng& rng, bool with_bias = true);
  bool has_bias() const { return bias.ndim() == 1; }
  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
  Tensor forward(const Tensor& x) const;
  void collect(ParamList& out, const std::string& prefix) const;
};

struct LayerNorm {
  Tensor gamma;
  Tensor beta;
  double eps = 1e-5;

  static LayerNorm init(std::size_t width, double eps = 1e-5);
  Tensor forward(const Tensor& x) const { return layer_norm(x, gamma, beta, eps); }
  void collect(ParamList& out, const std::string& prefix) const;
};

/// Multi-head attention with bias-free D x D projections. Per-head
/// projections are the column blocks of wq/wk/wv.
struct MultiHeadAttention {
  Tensor wq, wk, wv, wo;
  std::size_t heads = 1;

  static MultiHeadAttention init(std::size_t width, std::size_t heads, Rng& rng);
  /// Queries from `query_src` [B,Lq,D]; keys and values from `kv_src` [B,Lk,D].
  Tensor forward(const Tensor& query_src, const Tensor& kv_src) const;
  Tensor self_attention(const Tensor& x) const { return forward(x, x); }
  void collect(ParamList& out, const std::string& prefix) const;
};

struct FeedForward {
  Linear fc1;
  Linear fc2;

  static FeedForward init(std::size_t width, std::size_t hidden, Rng& rng);
  Tensor forward(const Tensor& x) const { return fc2.forward(gelu(fc1.forward(x))); }
  void collect(ParamList& out, const std::string& prefix) const;
};

struct TransformerBlock {
  LayerNorm ln1, ln2;
  MultiHeadAttention attn;
  FeedForward ffn;

  static TransformerBlock init(std::size_t width, std::size_t heads, std::size_t ffn_ratio,
                               Rng& rng, double ln_eps = 1e-5);
  /// x + DropPath(MSA(LN(x))), then x + DropPath(FFN(LN(x))).
  Tensor forward_pre_norm(const Tensor& x, double drop_rate, bool training, Rng& rng) const;
  /// LN(y + MSA(y)), then LN(y + FFN(y)).
  Tensor forward_post_norm(const Tensor& y) const;
  void collect(ParamList& out, const std::string& prefix) const;
};

}  // namespace cext
