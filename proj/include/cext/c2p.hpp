#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cext/channel.hpp"
#include "cext/nn.hpp"

namespace cext {

/// Shapes and fixed scalings of the CSI-to-PDP auto-encoder.
struct C2PConfig {
  std::size_t n_bins = 128;
  std::size_t csi_dim = 400;  // 2 * n_subcarriers for one antenna pair
  std::size_t hidden = 512;
  /// Compression reference: the network sees log(1 + p / p0). p0 is
  /// pdp_scale itself, or pdp_scale times the sample power when per_sample.
  double pdp_scale = 1.0;
  /// Global mode: the latent is matched to csi / csi_scale.
  double csi_scale = 1.0;
  /// Scale every sample by its own power; see C2PScales.
  bool per_sample = false;
  /// PDP total power per unit mean-square CSI entry (per-sample mode).
  double power_gain = 1.0;
  double bin_width = 6.25e-9;

  void validate() const;
};

/// Three fully connected layers with GELU between them.
struct Mlp3 {
  Linear l1, l2, l3;

  static Mlp3 init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng);
  Tensor forward(const Tensor& x) const;
  void collect(ParamList& out, const std::string& prefix) const;
};

/// Compression reference p0 and CSI unit for one sample.
struct C2PScales {
  double p0 = 1.0;
  double unit = 1.0;
};

struct C2PParams {
  Mlp3 encoder;  // n_bins -> hidden -> hidden -> csi_dim
  Mlp3 decoder;  // csi_dim -> hidden -> hidden -> n_bins, softplus head
};

class C2PModel {
 public:
  C2PModel() = default;
  C2PModel(const C2PConfig& config, std::uint64_t seed);

  const C2PConfig& config() const { return config_; }
  C2PConfig& mutable_config() { return config_; }
  ParamList parameters() const;

  // Tensor-level passes on the network's own units: compressed PDP rows
  // [B, n_bins] and scaled CSI rows [B, csi_dim].
  Tensor encode(const Tensor& pdp_compressed) const;
  Tensor decode(const Tensor& latent) const;

  // Physical-unit conversions.
  C2PScales scales_from_pdp(std::span<const double> pdp) const;
  C2PScales scales_from_csi(std::span<const double> csi) const;
  static std::vector<double> compress(std::span<const double> pdp, double p0);
  static std::vector<double> expand(std::span<const double> compressed, double p0);

  C2PParams params;

 private:
  C2PConfig config_;
};

/// Latent for one PDP, in physical CSI units ([re..., im...]).
std::vector<double> c2p_encode(const C2PModel& model, const PowerDelayProfile& pdp);
/// PDP decoded from a latent given in physical CSI units.
PowerDelayProfile c2p_decode(const C2PModel& model, std::span<const double> latent);
/// PDP inferred from a measured CSI vector; the same map as c2p_decode.
PowerDelayProfile infer_pdp(const C2PModel& model, std::span<const double> csi);
/// infer_pdp for every antenna pair of a channel matrix.
PdpGrid infer_pdp_grid(const C2PModel& model, const ChannelMatrix& csi);

/// (1/N) sum_i (||P_i - P_hat_i||^2 + ||x_i - z_i||^2) over batch rows.
Tensor c2p_loss(const Tensor& pdp_hat, const Tensor& pdp, const Tensor& latent,
                const Tensor& csi);
/// Same quantity on plain vectors, one entry per sample.
double c2p_loss_value(std::span<const std::vector<double>> pdp_hat,
                      std::span<const std::vector<double>> pdp,
                      std::span<const std::vector<double>> latent,
                      std::span<const std::vector<double>> csi);

}  // namespace cext
