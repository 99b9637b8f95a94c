#include "cext/extrapolator.hpp"

#include <atomic>
#include <cmath>
#include <iostream>

#include "cext/error.hpp"

namespace cext {

FusionKind parse_fusion_kind(const std::string& name) {
  if (name == "cross" || name == "proposed") return FusionKind::CrossAttention;
  if (name == "swapped") return FusionKind::Swapped;
  if (name == "concat") return FusionKind::Concat;
  if (name == "none" || name == "baseline") return FusionKind::None;
  throw ConfigError("unknown fusion kind '" + name + "' (cross, swapped, concat, none)");
}

std::string to_string(FusionKind kind) {
  switch (kind) {
    case FusionKind::CrossAttention: return "cross";
    case FusionKind::Swapped: return "swapped";
    case FusionKind::Concat: return "concat";
    case FusionKind::None: return "none";
  }
  return "?";
}

void ExtrapolatorConfig::validate() const {
  if (patch == 0 || n_rx % patch || n_tx % patch) {
    throw ConfigError("antenna grid " + std::to_string(n_rx) + "x" + std::to_string(n_tx) +
                      " is not divisible by patch size " + std::to_string(patch));
  }
  if (heads == 0 || embed_dim % heads) throw ConfigError("embed_dim must be divisible by heads");
  if (decoder_heads == 0 || decoder_dim % decoder_heads) {
    throw ConfigError("decoder_dim must be divisible by decoder_heads");
  }
  if (decoder_dim > embed_dim) throw ConfigError("decoder_dim must not exceed embed_dim");
  if (embed_dim % 4 || decoder_dim % 4) {
    throw ConfigError("embedding widths must be divisible by 4 for the 2D positional encoding");
  }
  if (droppath < 0 || droppath >= 1) throw ConfigError("droppath must lie in [0, 1)");
  if (csi_channels == 0 || mp_channels == 0) throw ConfigError("channel counts must be positive");
}

Tensor positional_encoding_2d(std::size_t rows, std::size_t cols, std::size_t width) {
  if (width == 0 || width % 4) {
    throw ConfigError("positional encoding width " + std::to_string(width) +
                      " is not divisible by 4");
  }
  const std::size_t half = width / 2;
  std::vector<double> table(rows * cols * width);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double* e = table.data() + (i * cols + j) * width;
      for (std::size_t k = 0; k < width / 4; ++k) {
        const double omega = std::pow(10000.0, 2.0 * static_cast<double>(k) / static_cast<double>(width));
        e[2 * k] = std::sin(static_cast<double>(i) / omega);
        e[2 * k + 1] = std::cos(static_cast<double>(i) / omega);
        e[half + 2 * k] = std::sin(static_cast<double>(j) / omega);
        e[half + 2 * k + 1] = std::cos(static_cast<double>(j) / omega);
      }
    }
  }
  return Tensor(Shape{rows * cols, width}, std::move(table));
}

void PatchEncoder::collect(ParamList& out, const std::string& prefix) const {
  embed.collect(out, prefix + ".embed");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    blocks[i].collect(out, prefix + ".block" + std::to_string(i));
  }
  norm.collect(out, prefix + ".norm");
}

namespace {

PatchEncoder make_encoder(const ExtrapolatorConfig& c, std::size_t channels, Rng& rng) {
  PatchEncoder e;
  e.embed = Linear::init(c.patch_features(channels), c.embed_dim, rng);
  for (std::size_t i = 0; i < c.encoder_depth; ++i) {
    e.blocks.push_back(TransformerBlock::init(c.embed_dim, c.heads, c.ffn_ratio, rng));
  }
  e.norm = LayerNorm::init(c.embed_dim);
  return e;
}

}  // namespace

Extrapolator::Extrapolator(const ExtrapolatorConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  Rng rng(seed);
  csi_encoder = make_encoder(config_, config_.csi_channels, rng);
  mp_encoder = make_encoder(config_, config_.mp_channels, rng);
  fusion.attention = MultiHeadAttention::init(config_.embed_dim, config_.heads, rng);
  fusion.concat_proj = Linear::init(2 * config_.embed_dim, config_.embed_dim, rng);
  decoder.embed = Linear::init(config_.embed_dim, config_.decoder_dim, rng);
  std::vector<double> mt(config_.decoder_dim);
  for (double& v : mt) v = normal(rng, 0.0, 0.02);
  decoder.mask_token = Tensor(Shape{config_.decoder_dim}, std::move(mt)).set_requires_grad();
  for (std::size_t i = 0; i < config_.decoder_depth; ++i) {
    decoder.blocks.push_back(
        TransformerBlock::init(config_.decoder_dim, config_.decoder_heads, config_.ffn_ratio, rng));
  }
  decoder.norm = LayerNorm::init(config_.decoder_dim);
  decoder.head = Linear::init(config_.decoder_dim, config_.patch_features(config_.csi_channels), rng);
  pos_enc_ = positional_encoding_2d(config_.grid_rows(), config_.grid_cols(), config_.embed_dim);
  dec_pos_enc_ =
      positional_encoding_2d(config_.grid_rows(), config_.grid_cols(), config_.decoder_dim);
}

ParamList Extrapolator::parameters() const {
  ParamList out;
  csi_encoder.collect(out, "csi_encoder");
  switch (config_.fusion) {
    case FusionKind::CrossAttention:
    case FusionKind::Swapped:
      mp_encoder.collect(out, "mp_encoder");
      fusion.attention.collect(out, "fusion.attention");
      break;
    case FusionKind::Concat:
      mp_encoder.collect(out, "mp_encoder");
      fusion.concat_proj.collect(out, "fusion.concat_proj");
      break;
    case FusionKind::None:
      break;
  }
  decoder.embed.collect(out, "decoder.embed");
  out.push_back({"decoder.mask_token", decoder.mask_token, false});
  for (std::size_t i = 0; i < decoder.blocks.size(); ++i) {
    decoder.blocks[i].collect(out, "decoder.block" + std::to_string(i));
  }
  decoder.norm.collect(out, "decoder.norm");
  decoder.head.collect(out, "decoder.head");
  return out;
}

Tensor Extrapolator::patch_embed(const Tensor& grid, const PatchEncoder& enc) const {
  return enc.embed.forward(patchify(grid, config_.patch));
}

Tensor Extrapolator::encoder_forward(const Tensor& tokens, const PatchEncoder& enc, bool training,
                                     Rng& rng) const {
  Tensor x = tokens;
  for (const auto& block : enc.blocks) x = block.forward_pre_norm(x, config_.droppath, training, rng);
  return enc.norm.forward(x);
}

Tensor Extrapolator::fuse(const Tensor& z_mp, const Tensor& z_csi) const {
  if (z_mp.shape() != z_csi.shape()) {
    throw DimensionError("fusion inputs differ: " + shape_str(z_mp.shape()) + " vs " +
                         shape_str(z_csi.shape()));
  }
  switch (config_.fusion) {
    case FusionKind::CrossAttention: return fusion.attention.forward(z_mp, z_csi);
    case FusionKind::Swapped: return fusion.attention.forward(z_csi, z_mp);
    case FusionKind::Concat: return fusion.concat_proj.forward(concat(z_csi, z_mp, -1));
    case FusionKind::None: return z_csi;
  }
  return z_csi;
}

Tensor Extrapolator::decode(const Tensor& x_fusion, const Tensor& csi_tokens_visible,
                            std::span<const MaskPlan> plans) const {
  if (x_fusion.shape() != csi_tokens_visible.shape()) {
    throw DimensionError("decoder inputs differ: " + shape_str(x_fusion.shape()) + " vs " +
                         shape_str(csi_tokens_visible.shape()));
  }
  if (plans.empty() || plans[0].total != config_.tokens() || x_fusion.dim(1) != plans[0].keep) {
    throw DimensionError("mask plan does not match the decoder token layout");
  }
  Tensor y = decoder.embed.forward(add(x_fusion, csi_tokens_visible));
  y = restore_sequence(y, decoder.mask_token, plans);
  y = add(y, dec_pos_enc_);
  for (const auto& block : decoder.blocks) y = block.forward_post_norm(y);
  y = decoder.head.forward(decoder.norm.forward(y));
  return unpatchify(y, config_.csi_channels, config_.n_rx, config_.n_tx, config_.patch);
}

Tensor Extrapolator::forward(const Tensor& csi, const Tensor& mp, std::span<const MaskPlan> plans,
                             bool training, Rng& rng) const {
  const Tensor csi_pos = add(patch_embed(csi, csi_encoder), pos_enc_);
  const Tensor csi_visible = apply_mask(csi_pos, plans);
  const Tensor z_csi = encoder_forward(csi_visible, csi_encoder, training, rng);
  Tensor fused = z_csi;
  if (config_.uses_multipath()) {
    if (mp.ndim() != 4 || mp.dim(0) != csi.dim(0) || mp.dim(1) != config_.mp_channels ||
        mp.dim(2) != config_.n_rx || mp.dim(3) != config_.n_tx) {
      throw DimensionError("multipath features " + shape_str(mp.shape()) +
                           " do not match the CSI grid");
    }
    const Tensor mp_visible = apply_mask(add(patch_embed(mp, mp_encoder), pos_enc_), plans);
    const Tensor z_mp = encoder_forward(mp_visible, mp_encoder, training, rng);
    fused = fuse(z_mp, z_csi);
  }
  return decode(fused, csi_visible, plans);
}

std::vector<double> masked_cell_weights(std::span<const MaskPlan> plans, std::size_t channels,
                                        std::size_t rows, std::size_t cols, std::size_t patch) {
  const std::size_t gc = cols / patch;
  std::vector<double> w(plans.size() * channels * rows * cols, 0.0);
  for (std::size_t b = 0; b < plans.size(); ++b)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
          const std::size_t tok = (i / patch) * gc + j / patch;
          w[((b * channels + c) * rows + i) * cols + j] = plans[b].binary_mask[tok] ? 1.0 : 0.0;
        }
  return w;
}

Tensor masked_mse(const Tensor& prediction, const Tensor& truth, std::span<const MaskPlan> plans,
                  std::size_t patch) {
  if (prediction.shape() != truth.shape() || prediction.ndim() != 4) {
    throw DimensionError("masked_mse shapes differ: " + shape_str(prediction.shape()) + " vs " +
                         shape_str(truth.shape()));
  }
  if (plans.size() != prediction.dim(0)) throw DimensionError("masked_mse: one plan per sample");
  std::size_t masked = 0;
  for (const auto& p : plans) {
    if (p.total != (prediction.dim(2) / patch) * (prediction.dim(3) / patch)) {
      throw DimensionError("masked_mse: plan length does not match the patch grid");
    }
    masked += p.masked();
  }
  if (masked == 0) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
      std::cerr << "warning: masked_mse with no masked patches is defined as 0\n";
    }
    return scale(sum(sub(prediction, prediction)), 0.0);
  }
  const Tensor w(prediction.shape(),
                 masked_cell_weights(plans, prediction.dim(1), prediction.dim(2),
                                     prediction.dim(3), patch));
  return scale(sum(mul(square(sub(prediction, truth)), w)), 1.0 / static_cast<double>(masked));
}

Tensor extrapolate(const Extrapolator& model, const NormalizationSet& norm, const Tensor& csi,
                   const Tensor& mp, std::span<const MaskPlan> plans, bool paste_back) {
  const auto& cfg = model.config();
  if (csi.ndim() != 4 || csi.dim(1) != cfg.csi_channels || csi.dim(2) != cfg.n_rx ||
      csi.dim(3) != cfg.n_tx) {
    throw DimensionError("CSI input " + shape_str(csi.shape()) + " does not match the model grid");
  }
  const std::vector<double> masked = masked_cell_weights(plans, cfg.csi_channels, cfg.n_rx,
                                                         cfg.n_tx, cfg.patch);
  std::vector<double> x(csi.numel());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = masked[i] > 0 ? 0.0 : norm.csi.apply(csi[i]);
  }
  Tensor mp_norm;
  if (cfg.uses_multipath()) {
    if (norm.mp.size() != cfg.mp_channels) {
      throw DimensionError("normalisation has " + std::to_string(norm.mp.size()) +
                           " multipath channels, model expects " + std::to_string(cfg.mp_channels));
    }
    std::vector<double> f(mp.numel());
    const std::size_t plane = cfg.n_rx * cfg.n_tx;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = norm.mp[(i / plane) % cfg.mp_channels].apply(mp[i]);
    mp_norm = Tensor(mp.shape(), std::move(f));
  }
  Rng unused(0);
  const Tensor out = model.forward(Tensor(csi.shape(), std::move(x)), mp_norm, plans, false, unused);
  std::vector<double> y(out.numel());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = (paste_back && masked[i] == 0) ? csi[i] : norm.csi.invert(out[i]);
  }
  return Tensor(out.shape(), std::move(y));
}

}  // namespace cext
