#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cext/features.hpp"
#include "cext/masking.hpp"
#include "cext/nn.hpp"

namespace cext {

/// How the multipath branch is merged into the CSI branch.
enum class FusionKind {
  CrossAttention,  // query from multipath features, key/value from CSI
  Swapped,         // query from CSI, key/value from multipath features
  Concat,          // linear projection of the concatenated features
  None,            // no multipath branch (baseline MAE)
};

FusionKind parse_fusion_kind(const std::string& name);
std::string to_string(FusionKind kind);

struct ExtrapolatorConfig {
  std::size_t n_rx = 8;
  std::size_t n_tx = 16;
  std::size_t patch = 2;
  std::size_t csi_channels = 2;
  std::size_t mp_channels = 2;
  std::size_t embed_dim = 128;
  std::size_t encoder_depth = 4;
  std::size_t decoder_depth = 2;
  std::size_t heads = 4;
  std::size_t ffn_ratio = 4;
  std::size_t decoder_dim = 64;
  std::size_t decoder_heads = 4;
  double droppath = 0.1;
  FusionKind fusion = FusionKind::CrossAttention;

  std::size_t grid_rows() const { return n_rx / patch; }
  std::size_t grid_cols() const { return n_tx / patch; }
  std::size_t tokens() const { return grid_rows() * grid_cols(); }
  std::size_t patch_features(std::size_t channels) const { return channels * patch * patch; }
  bool uses_multipath() const { return fusion != FusionKind::None; }
  void validate() const;
};

/// Fixed 2D sine-cosine table [rows*cols, width]: the first half of each row
/// encodes the patch-grid row, the second half the column, as interleaved
/// (sin, cos) pairs with frequencies 1 / 10000^(2k/width).
Tensor positional_encoding_2d(std::size_t rows, std::size_t cols, std::size_t width);

struct PatchEncoder {
  Linear embed;  // C*p*p -> D, equivalent to a stride-p convolution
  std::vector<TransformerBlock> blocks;
  LayerNorm norm;

  void collect(ParamList& out, const std::string& prefix) const;
};

struct FusionParams {
  MultiHeadAttention attention;  // CrossAttention / Swapped
  Linear concat_proj;            // Concat: 2D -> D
};

struct DecoderParams {
  Linear embed;  // D -> decoder_dim
  Tensor mask_token;
  std::vector<TransformerBlock> blocks;
  LayerNorm norm;
  Linear head;  // decoder_dim -> p*p*2
};

/// Dual-encoder masked auto-encoder with cross-attention fusion.
class Extrapolator {
 public:
  Extrapolator() = default;
  Extrapolator(const ExtrapolatorConfig& config, std::uint64_t seed);

  const ExtrapolatorConfig& config() const { return config_; }
  ParamList parameters() const;

  /// Tokens of a [B,C,M,K] grid through the patch projection.
  Tensor patch_embed(const Tensor& grid, const PatchEncoder& enc) const;
  /// Transformer stack over already position-encoded tokens.
  Tensor encoder_forward(const Tensor& tokens, const PatchEncoder& enc, bool training,
                         Rng& rng) const;
  /// Merges the two encoded streams according to config().fusion.
  Tensor fuse(const Tensor& z_mp, const Tensor& z_csi) const;
  /// Residual add, decoder embedding, mask-token restore, decoder blocks and
  /// the patch head; returns [B, 2, M, K].
  Tensor decode(const Tensor& x_fusion, const Tensor& csi_tokens_visible,
                std::span<const MaskPlan> plans) const;

  /// Full forward pass on normalised inputs: csi [B,2,M,K], mp [B,C,M,K]
  /// (ignored when fusion is None). Returns the reconstruction [B,2,M,K].
  Tensor forward(const Tensor& csi, const Tensor& mp, std::span<const MaskPlan> plans,
                 bool training, Rng& rng) const;

  PatchEncoder csi_encoder;
  PatchEncoder mp_encoder;
  FusionParams fusion;
  DecoderParams decoder;

 private:
  ExtrapolatorConfig config_;
  Tensor pos_enc_;      // [L, D], shared by both encoders
  Tensor dec_pos_enc_;  // [L, decoder_dim]
};

/// Mean squared error over masked patches only:
/// (1/|masked|) * sum over masked patches of ||patch(truth) - patch(pred)||^2.
/// Returns 0 (and warns once on stderr) when nothing is masked.
Tensor masked_mse(const Tensor& prediction, const Tensor& truth, std::span<const MaskPlan> plans,
                  std::size_t patch);

/// Z-score statistics carried with a trained extrapolator.
struct NormalizationSet {
  NormStats csi;
  std::vector<NormStats> mp;  // one per feature channel
};

/// Inference on raw (physical-unit) inputs for one or more subcarrier slices.
/// `csi` [B,2,M,K] only needs valid entries on kept patches; masked entries
/// are zeroed before use. `mp` [B,C,M,K]. With paste_back the known patches
/// of the output are replaced by their input values.
Tensor extrapolate(const Extrapolator& model, const NormalizationSet& norm, const Tensor& csi,
                   const Tensor& mp, std::span<const MaskPlan> plans, bool paste_back = true);

/// 1 on masked patch cells of a [B,C,M,K] grid, 0 on kept ones.
std::vector<double> masked_cell_weights(std::span<const MaskPlan> plans, std::size_t channels,
                                        std::size_t rows, std::size_t cols, std::size_t patch);

}  // namespace cext
