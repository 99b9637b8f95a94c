#include "cext/c2p.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cext/error.hpp"

namespace cext {

void C2PConfig::validate() const {
  if (n_bins == 0 || csi_dim == 0 || hidden == 0) throw ConfigError("C2P dimensions must be positive");
  if (!(pdp_scale > 0) || !(csi_scale > 0) || !(power_gain > 0)) {
    throw ConfigError("C2P scales must be positive");
  }
  if (!(bin_width > 0)) throw ConfigError("C2P bin width must be positive");
}

Mlp3 Mlp3::init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
  return Mlp3{Linear::init(in, hidden, rng), Linear::init(hidden, hidden, rng),
              Linear::init(hidden, out, rng)};
}

Tensor Mlp3::forward(const Tensor& x) const {
  return l3.forward(gelu(l2.forward(gelu(l1.forward(x)))));
}

void Mlp3::collect(ParamList& out, const std::string& prefix) const {
  l1.collect(out, prefix + ".l1");
  l2.collect(out, prefix + ".l2");
  l3.collect(out, prefix + ".l3");
}

C2PModel::C2PModel(const C2PConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  params.encoder = Mlp3::init(config_.n_bins, config_.hidden, config_.csi_dim, rng);
  params.decoder = Mlp3::init(config_.csi_dim, config_.hidden, config_.n_bins, rng);
}

ParamList C2PModel::parameters() const {
  ParamList out;
  params.encoder.collect(out, "encoder");
  params.decoder.collect(out, "decoder");
  return out;
}

Tensor C2PModel::encode(const Tensor& pdp_compressed) const {
  if (pdp_compressed.dim(-1) != config_.n_bins) {
    throw DimensionError("PDP has " + std::to_string(pdp_compressed.dim(-1)) + " bins, model expects " +
                         std::to_string(config_.n_bins));
  }
  return params.encoder.forward(pdp_compressed);
}

Tensor C2PModel::decode(const Tensor& latent) const {
  if (latent.dim(-1) != config_.csi_dim) {
    throw DimensionError("latent has " + std::to_string(latent.dim(-1)) + " entries, model expects " +
                         std::to_string(config_.csi_dim));
  }
  return softplus(params.decoder.forward(latent));
}

C2PScales C2PModel::scales_from_pdp(std::span<const double> pdp) const {
  if (!config_.per_sample) return {config_.pdp_scale, config_.csi_scale};
  const double t = std::max(std::accumulate(pdp.begin(), pdp.end(), 0.0),
                            std::numeric_limits<double>::min());
  return {config_.pdp_scale * t, std::sqrt(t / config_.power_gain)};
}

C2PScales C2PModel::scales_from_csi(std::span<const double> csi) const {
  if (!config_.per_sample) return {config_.pdp_scale, config_.csi_scale};
  double sq = 0.0;
  for (double v : csi) sq += v * v;
  const double t = std::max(config_.power_gain * sq / static_cast<double>(std::max<std::size_t>(csi.size(), 1)),
                            std::numeric_limits<double>::min());
  return {config_.pdp_scale * t, std::sqrt(t / config_.power_gain)};
}

std::vector<double> C2PModel::compress(std::span<const double> pdp, double p0) {
  std::vector<double> out(pdp.size());
  for (std::size_t i = 0; i < pdp.size(); ++i) out[i] = std::log1p(pdp[i] / p0);
  return out;
}

std::vector<double> C2PModel::expand(std::span<const double> compressed, double p0) {
  std::vector<double> out(compressed.size());
  for (std::size_t i = 0; i < compressed.size(); ++i) out[i] = p0 * std::expm1(compressed[i]);
  return out;
}

std::vector<double> c2p_encode(const C2PModel& model, const PowerDelayProfile& pdp) {
  const auto& c = model.config();
  if (pdp.size() != c.n_bins) {
    throw DimensionError("PDP has " + std::to_string(pdp.size()) + " bins, model expects " +
                         std::to_string(c.n_bins));
  }
  const C2PScales sc = model.scales_from_pdp(pdp.bins);
  const Tensor z = model.encode(Tensor(Shape{1, c.n_bins}, C2PModel::compress(pdp.bins, sc.p0)));
  std::vector<double> out(z.data().begin(), z.data().end());
  for (double& v : out) v *= sc.unit;
  return out;
}

PowerDelayProfile c2p_decode(const C2PModel& model, std::span<const double> latent) {
  const auto& c = model.config();
  if (latent.size() != c.csi_dim) {
    throw DimensionError("latent has " + std::to_string(latent.size()) + " entries, model expects " +
                         std::to_string(c.csi_dim));
  }
  const C2PScales sc = model.scales_from_csi(latent);
  std::vector<double> z(latent.begin(), latent.end());
  for (double& v : z) v /= sc.unit;
  const Tensor y = model.decode(Tensor(Shape{1, c.csi_dim}, std::move(z)));
  return PowerDelayProfile{C2PModel::expand(y.data(), sc.p0), c.bin_width};
}

PowerDelayProfile infer_pdp(const C2PModel& model, std::span<const double> csi) {
  return c2p_decode(model, csi);
}

PdpGrid infer_pdp_grid(const C2PModel& model, const ChannelMatrix& csi) {
  const auto& c = model.config();
  if (2 * csi.n_sub != c.csi_dim) {
    throw DimensionError("CSI has " + std::to_string(csi.n_sub) + " subcarriers, model expects " +
                         std::to_string(c.csi_dim / 2));
  }
  const std::size_t pairs = csi.n_rx * csi.n_tx;
  std::vector<double> x(pairs * c.csi_dim);
  std::vector<double> p0(pairs);
  for (std::size_t m = 0; m < csi.n_rx; ++m) {
    for (std::size_t k = 0; k < csi.n_tx; ++k) {
      const std::vector<double> v = csi.pair_vector(m, k);
      const C2PScales sc = model.scales_from_csi(v);
      p0[m * csi.n_tx + k] = sc.p0;
      double* row = x.data() + (m * csi.n_tx + k) * c.csi_dim;
      for (std::size_t i = 0; i < c.csi_dim; ++i) row[i] = v[i] / sc.unit;
    }
  }
  const Tensor y = model.decode(Tensor(Shape{pairs, c.csi_dim}, std::move(x)));
  PdpGrid grid{csi.n_rx, csi.n_tx, {}};
  grid.profiles.reserve(pairs);
  for (std::size_t p = 0; p < pairs; ++p) {
    grid.profiles.push_back(
        PowerDelayProfile{C2PModel::expand(y.data().subspan(p * c.n_bins, c.n_bins), p0[p]), c.bin_width});
  }
  return grid;
}

Tensor c2p_loss(const Tensor& pdp_hat, const Tensor& pdp, const Tensor& latent, const Tensor& csi) {
  if (pdp_hat.shape() != pdp.shape() || latent.shape() != csi.shape() || pdp.ndim() != 2 ||
      csi.ndim() != 2 || pdp.dim(0) != csi.dim(0)) {
    throw DimensionError("c2p_loss shapes: " + shape_str(pdp_hat.shape()) + ", " +
                         shape_str(pdp.shape()) + ", " + shape_str(latent.shape()) + ", " +
                         shape_str(csi.shape()));
  }
  if (pdp.dim(0) == 0) throw ContractError("c2p_loss on an empty batch");
  const Tensor total = add(sum(square(sub(pdp, pdp_hat))), sum(square(sub(csi, latent))));
  return scale(total, 1.0 / static_cast<double>(pdp.dim(0)));
}

double c2p_loss_value(std::span<const std::vector<double>> pdp_hat,
                      std::span<const std::vector<double>> pdp,
                      std::span<const std::vector<double>> latent,
                      std::span<const std::vector<double>> csi) {
  const std::size_t n = pdp.size();
  if (n == 0) throw ContractError("c2p_loss on an empty batch");
  if (pdp_hat.size() != n || latent.size() != n || csi.size() != n) {
    throw DimensionError("c2p_loss: batch sizes differ");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (pdp_hat[i].size() != pdp[i].size() || latent[i].size() != csi[i].size()) {
      throw DimensionError("c2p_loss: sample " + std::to_string(i) + " has mismatched lengths");
    }
    for (std::size_t j = 0; j < pdp[i].size(); ++j) total += (pdp[i][j] - pdp_hat[i][j]) * (pdp[i][j] - pdp_hat[i][j]);
    for (std::size_t j = 0; j < csi[i].size(); ++j) total += (csi[i][j] - latent[i][j]) * (csi[i][j] - latent[i][j]);
  }
  return total / static_cast<double>(n);
}

}  // namespace cext
