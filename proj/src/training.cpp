#include "cext/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>

#include "cext/error.hpp"

namespace cext {
namespace {

void check_finite(double loss, const char* what, std::size_t epoch, std::size_t batch,
                  std::uint64_t step) {
  if (!std::isfinite(loss)) {
    throw NumericError(std::string(what) + " loss is " + (std::isnan(loss) ? "NaN" : "infinite") +
                       " at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
                       ", step " + std::to_string(step));
  }
}

// Runs forward + backward for one step; the tape is cleared on every path.
template <typename Forward>
double tape_step(GradTape& tape, Adam& opt, Forward&& forward, const char* what, std::size_t epoch,
                 std::size_t batch) {
  opt.zero_grad();
  try {
    TapeScope scope(tape);
    const Tensor loss = forward();
    const double value = loss.item();
    check_finite(value, what, epoch, batch, opt.steps() + 1);
    tape.backward(loss);
    opt.step();
    return value;
  } catch (...) {
    tape.clear();
    throw;
  }
}

struct C2PBatch {
  Tensor pdp_in;      // encoder input, compressed with the PDP-side reference
  Tensor csi;         // latent target in network units
  Tensor gain;        // per-row factor taking the latent to decoder units
  Tensor pdp_target;  // compressed with the CSI-side reference
};

C2PBatch c2p_batch(const C2PModel& model, const C2PData& data, std::span<const std::size_t> idx) {
  const auto& c = model.config();
  const std::size_t n = idx.size();
  std::vector<double> pin(n * c.n_bins), pt(n * c.n_bins), x(n * c.csi_dim), g(n * c.csi_dim);
  for (std::size_t b = 0; b < n; ++b) {
    const auto& p = data.pdp[idx[b]];
    const auto& v = data.csi[idx[b]];
    if (p.size() != c.n_bins || v.size() != c.csi_dim) {
      throw DimensionError("C2P sample " + std::to_string(idx[b]) + " has the wrong length");
    }
    const C2PScales sp = model.scales_from_pdp(p);
    const C2PScales sx = model.scales_from_csi(v);
    for (std::size_t j = 0; j < c.n_bins; ++j) {
      pin[b * c.n_bins + j] = std::log1p(p[j] / sp.p0);
      pt[b * c.n_bins + j] = std::log1p(p[j] / sx.p0);
    }
    for (std::size_t j = 0; j < c.csi_dim; ++j) {
      x[b * c.csi_dim + j] = v[j] / sp.unit;
      g[b * c.csi_dim + j] = sp.unit / sx.unit;
    }
  }
  return {Tensor(Shape{n, c.n_bins}, std::move(pin)), Tensor(Shape{n, c.csi_dim}, std::move(x)),
          Tensor(Shape{n, c.csi_dim}, std::move(g)), Tensor(Shape{n, c.n_bins}, std::move(pt))};
}

Tensor c2p_batch_loss(const C2PModel& model, const C2PBatch& b, double measured_weight = 0.0) {
  const Tensor z = model.encode(b.pdp_in);
  Tensor loss = c2p_loss(model.decode(mul(z, b.gain)), b.pdp_target, z, b.csi);
  if (measured_weight > 0.0) {
    const Tensor p_meas = model.decode(mul(b.csi, b.gain));
    const double w = measured_weight / static_cast<double>(b.csi.dim(0));
    loss = add(loss, scale(sum(square(sub(b.pdp_target, p_meas))), w));
  }
  return loss;
}

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

std::string history_csv(const History& history) {
  std::string out = "epoch,train_loss,test_loss,lr\n";
  char buf[160];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g\n", r.epoch, r.train_loss, r.test_loss, r.lr);
    out += buf;
  }
  return out;
}

void write_history_csv(const std::string& path, const History& history) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << history_csv(history);
}

C2PData c2p_pairs(const Dataset& ds, const std::vector<std::size_t>& indices, std::uint64_t seed) {
  if (!ds.has(kHasCsi) || !ds.has(kHasPdp)) throw ConfigError("C2P training needs CSI and PDPs");
  C2PData out;
  const std::size_t pairs = ds.geometry.pairs();
  for (std::size_t i : indices) {
    Rng rng(derive_seed(seed, {i}));
    const std::size_t p = std::uniform_int_distribution<std::size_t>(0, pairs - 1)(rng);
    const DatasetSample& s = ds.samples.at(i);
    out.pdp.push_back(s.pdp.profiles[p].bins);
    out.csi.push_back(s.csi.pair_vector(p / ds.geometry.n_tx, p % ds.geometry.n_tx));
  }
  return out;
}

C2PResult train_c2p(const C2PData& train, const C2PData& test, const C2PTrainConfig& cfg) {
  if (train.size() == 0) throw ConfigError("C2P training set is empty");
  if (cfg.batch == 0 || cfg.epochs == 0) throw ConfigError("batch and epochs must be positive");

  C2PConfig mc;
  mc.n_bins = train.pdp[0].size();
  mc.csi_dim = train.csi[0].size();
  mc.hidden = cfg.hidden;
  double peak = 0.0, sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    peak += *std::max_element(train.pdp[i].begin(), train.pdp[i].end());
    for (double x : train.csi[i]) sq += x * x;
    count += train.csi[i].size();
  }
  peak /= static_cast<double>(train.size());
  if (cfg.pdp_ref <= 0.0) throw ConfigError("c2p pdp_ref must be positive");
  if (cfg.measured_weight < 0.0) throw ConfigError("c2p measured_weight must be >= 0");
  mc.pdp_scale = peak > 0 ? cfg.pdp_ref * peak : 1.0;
  mc.csi_scale = sq > 0 ? std::sqrt(sq / static_cast<double>(count)) : 1.0;
  if (cfg.per_sample) {
    mc.per_sample = true;
    mc.pdp_scale = cfg.pdp_ref;
    double gain = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const double t = std::accumulate(train.pdp[i].begin(), train.pdp[i].end(), 0.0);
      double e = 0.0;
      for (double x : train.csi[i]) e += x * x;
      e /= static_cast<double>(train.csi[i].size());
      if (t > 0 && e > 0) {
        gain += t / e;
        ++used;
      }
    }
    mc.power_gain = used ? gain / static_cast<double>(used) : 1.0;
  }

  C2PResult result{C2PModel(mc, derive_seed(cfg.seed, {1})), {}};
  C2PModel& model = result.model;
  AdamConfig oc = AdamConfig::adam(cfg.lr);
  if (cfg.weight_decay > 0.0) {
    oc.weight_decay = cfg.weight_decay;
    oc.decoupled = true;
  }
  Adam opt(model.parameters(), oc);
  GradTape tape;
  Rng rng(derive_seed(cfg.seed, {2}));
  std::vector<std::size_t> order = iota_n(train.size());

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch, ++batch_no) {
      const std::size_t n = std::min(cfg.batch, order.size() - start);
      const auto idx = std::span<const std::size_t>(order).subspan(start, n);
      const C2PBatch b = c2p_batch(model, train, idx);
      total += static_cast<double>(n) * tape_step(
                   tape, opt,
                   [&] { return c2p_batch_loss(model, b, cfg.measured_weight); },
                   "C2P", epoch, batch_no);
    }
    HistoryRow row{epoch, total / static_cast<double>(train.size()),
                   test.size() ? c2p_eval_loss(model, test) : 0.0, cfg.lr};
    result.history.push_back(row);
    if (cfg.verbose) {
      std::fprintf(stderr, "c2p epoch %zu train %.6g test %.6g\n", epoch, row.train_loss, row.test_loss);
    }
  }
  return result;
}

C2PResult train_c2p(const Dataset& ds, const C2PTrainConfig& cfg) {
  const Split split = split_indices(ds.size(), cfg.train_fraction);
  return train_c2p(c2p_pairs(ds, split.train, cfg.seed), c2p_pairs(ds, split.test, cfg.seed), cfg);
}

double c2p_eval_loss(const C2PModel& model, const C2PData& data) {
  if (data.size() == 0) throw ConfigError("C2P evaluation set is empty");
  const std::vector<std::size_t> idx = iota_n(data.size());
  return c2p_batch_loss(model, c2p_batch(model, data, idx)).item();
}

double c2p_pdp_nmse_db(const C2PModel& model, const C2PData& data) {
  const double bw = model.config().bin_width;
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const PowerDelayProfile p_hat = c2p_decode(model, c2p_encode(model, PowerDelayProfile{data.pdp[i], bw}));
    for (std::size_t j = 0; j < p_hat.size(); ++j) {
      const double d = p_hat.bins[j] - data.pdp[i][j];
      err += d * d;
      ref += data.pdp[i][j] * data.pdp[i][j];
    }
  }
  return 10.0 * std::log10(std::max(err / ref, 1e-12));
}

double c2p_infer_nmse_db(const C2PModel& model, const C2PData& data) {
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const PowerDelayProfile p_hat = infer_pdp(model, data.csi[i]);
    for (std::size_t j = 0; j < p_hat.size(); ++j) {
      const double d = p_hat.bins[j] - data.pdp[i][j];
      err += d * d;
      ref += data.pdp[i][j] * data.pdp[i][j];
    }
  }
  return 10.0 * std::log10(std::max(err / ref, 1e-12));
}

double c2p_latent_nmse(const C2PModel& model, const C2PData& data) {
  const double bw = model.config().bin_width;
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::vector<double> z = c2p_encode(model, PowerDelayProfile{data.pdp[i], bw});
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double d = z[j] - data.csi[i][j];
      err += d * d;
      ref += data.csi[i][j] * data.csi[i][j];
    }
  }
  return err / ref;
}

double c2p_power_within(const C2PModel& model, const C2PData& data, double tolerance) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const PowerDelayProfile p = infer_pdp(model, data.csi[i]);
    const double truth = std::accumulate(data.pdp[i].begin(), data.pdp[i].end(), 0.0);
    if (std::abs(p.total() - truth) <= tolerance * truth) ++ok;
  }
  return data.size() ? static_cast<double>(ok) / static_cast<double>(data.size()) : 0.0;
}

void append_c2p(Checkpoint& ckpt, const C2PModel& model, const std::string& prefix) {
  const auto& c = model.config();
  ckpt.config.set(prefix + "n_bins", std::to_string(c.n_bins));
  ckpt.config.set(prefix + "csi_dim", std::to_string(c.csi_dim));
  ckpt.config.set(prefix + "hidden", std::to_string(c.hidden));
  ckpt.config.set(prefix + "pdp_scale", format_double(c.pdp_scale));
  ckpt.config.set(prefix + "csi_scale", format_double(c.csi_scale));
  ckpt.config.set(prefix + "per_sample", c.per_sample ? "1" : "0");
  ckpt.config.set(prefix + "power_gain", format_double(c.power_gain));
  ckpt.config.set(prefix + "bin_width", format_double(c.bin_width));
  append_parameters(ckpt, model.parameters(), prefix);
}

Checkpoint c2p_checkpoint(const C2PModel& model, const std::string& prefix) {
  Checkpoint ckpt;
  ckpt.kind = "c2p";
  append_c2p(ckpt, model, prefix);
  return ckpt;
}

C2PModel c2p_from_checkpoint(const Checkpoint& ckpt, const std::string& prefix) {
  const KeyValues& kv = ckpt.config;
  if (!kv.has(prefix + "n_bins")) throw IoError("checkpoint carries no CSI-to-PDP model");
  C2PConfig c;
  c.n_bins = kv.get(prefix + "n_bins", c.n_bins);
  c.csi_dim = kv.get(prefix + "csi_dim", c.csi_dim);
  c.hidden = kv.get(prefix + "hidden", c.hidden);
  c.pdp_scale = kv.get(prefix + "pdp_scale", c.pdp_scale);
  c.csi_scale = kv.get(prefix + "csi_scale", c.csi_scale);
  c.per_sample = kv.get(prefix + "per_sample", c.per_sample);
  c.power_gain = kv.get(prefix + "power_gain", c.power_gain);
  c.bin_width = kv.get(prefix + "bin_width", c.bin_width);
  C2PModel model(c, 0);
  assign_parameters(ckpt, model.parameters(), prefix);
  return model;
}

// ---------------------------------------------------------------- CE

FeatureGrid sample_features(const CEModel& model, const DatasetSample& sample) {
  if (model.gt_pdp) return build_variant(sample.pdp, model.feature_case);
  if (!model.c2p) throw ConfigError("feature inference needs a CSI-to-PDP model or the ground-truth bypass");
  return build_variant(infer_pdp_grid(*model.c2p, sample.csi), model.feature_case);
}

std::vector<std::size_t> spaced_slices(std::size_t n_sub, std::size_t count) {
  if (count == 0 || count >= n_sub) return iota_n(n_sub);
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = i * n_sub / count;
  return out;
}

Tensor csi_tensor(const Dataset& ds, std::span<const CEBatchItem> items, const NormStats* norm) {
  const std::size_t m_rx = ds.geometry.n_rx, k_tx = ds.geometry.n_tx, plane = m_rx * k_tx;
  std::vector<double> out(items.size() * 2 * plane);
  for (std::size_t b = 0; b < items.size(); ++b) {
    const ChannelMatrix& h = ds.samples[items[b].sample].csi;
    for (std::size_t m = 0; m < m_rx; ++m) {
      for (std::size_t k = 0; k < k_tx; ++k) {
        const std::size_t src = h.index(m, k, items[b].subcarrier);
        const std::size_t cell = m * k_tx + k;
        out[(b * 2 + 0) * plane + cell] = norm ? norm->apply(h.re[src]) : h.re[src];
        out[(b * 2 + 1) * plane + cell] = norm ? norm->apply(h.im[src]) : h.im[src];
      }
    }
  }
  return Tensor(Shape{items.size(), 2, m_rx, k_tx}, std::move(out));
}

Tensor feature_tensor(const std::vector<FeatureGrid>& features, std::span<const CEBatchItem> items,
                      const std::vector<NormStats>* norm) {
  const FeatureGrid& first = features.at(items[0].sample);
  const std::size_t c = first.channels, plane = first.n_rx * first.n_tx;
  std::vector<double> out(items.size() * c * plane);
  for (std::size_t b = 0; b < items.size(); ++b) {
    const FeatureGrid& g = features[items[b].sample];
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t i = 0; i < plane; ++i) {
        const double v = g.values[ch * plane + i];
        out[(b * c + ch) * plane + i] = norm ? (*norm)[ch].apply(v) : v;
      }
    }
  }
  return Tensor(Shape{items.size(), c, first.n_rx, first.n_tx}, std::move(out));
}

namespace {

std::vector<FeatureGrid> all_features(const CEModel& model, const Dataset& ds) {
  std::vector<FeatureGrid> out;
  if (!model.net.config().uses_multipath()) return out;
  out.reserve(ds.size());
  for (const auto& s : ds.samples) out.push_back(sample_features(model, s));
  return out;
}

double batch_loss(const CEModel& model, const Dataset& ds, const std::vector<FeatureGrid>& features,
                  std::span<const CEBatchItem> items, std::span<const MaskPlan> plans, bool training,
                  Rng& rng, Tensor* loss_out) {
  const Tensor csi = csi_tensor(ds, items, &model.norm.csi);
  Tensor mp;
  if (model.net.config().uses_multipath()) mp = feature_tensor(features, items, &model.norm.mp);
  const Tensor pred = model.net.forward(csi, mp, plans, training, rng);
  const Tensor loss = masked_mse(pred, csi, plans, model.net.config().patch);
  if (loss_out) *loss_out = loss;
  return loss.item();
}

std::vector<CEBatchItem> eval_items(const Dataset& ds, const std::vector<std::size_t>& indices,
                                    std::size_t slices) {
  std::vector<CEBatchItem> items;
  const std::vector<std::size_t> subs = spaced_slices(ds.carrier.n_subcarriers, slices);
  for (std::size_t i : indices) {
    for (std::size_t n : subs) items.push_back({i, n});
  }
  return items;
}

double eval_loss_with(const CEModel& model, const Dataset& ds, const std::vector<FeatureGrid>& features,
                      const std::vector<CEBatchItem>& items, double mask_ratio, std::uint64_t seed) {
  if (items.empty()) throw ConfigError("CE evaluation set is empty");
  Rng plan_rng(seed);
  Rng unused(0);
  double total = 0.0;
  const std::size_t chunk = 128;
  for (std::size_t start = 0; start < items.size(); start += chunk) {
    const std::size_t n = std::min(chunk, items.size() - start);
    const auto span = std::span<const CEBatchItem>(items).subspan(start, n);
    const auto plans = make_batch_plans(n, model.net.config().tokens(), mask_ratio, plan_rng);
    total += static_cast<double>(n) * batch_loss(model, ds, features, span, plans, false, unused, nullptr);
  }
  return total / static_cast<double>(items.size());
}

}  // namespace

double ce_eval_loss(const CEModel& model, const Dataset& ds, const std::vector<std::size_t>& indices,
                    double mask_ratio, std::size_t slices, std::uint64_t seed) {
  const std::vector<FeatureGrid> features = all_features(model, ds);
  return eval_loss_with(model, ds, features, eval_items(ds, indices, slices), mask_ratio, seed);
}

CEResult train_ce(const Dataset& ds, std::optional<C2PModel> c2p, const CETrainConfig& cfg) {
  if (!ds.has(kHasCsi)) throw ConfigError("CE training needs CSI");
  if (cfg.gt_pdp && !ds.has(kHasPdp)) throw ConfigError("ground-truth bypass needs PDPs in the dataset");
  ExtrapolatorConfig mc = cfg.model;
  mc.n_rx = ds.geometry.n_rx;
  mc.n_tx = ds.geometry.n_tx;
  mc.mp_channels = feature_channels(cfg.feature_case);
  mc.validate();
  if (mc.uses_multipath() && !cfg.gt_pdp && !c2p) {
    throw ConfigError("train_ce needs a CSI-to-PDP checkpoint unless the ground-truth PDP bypass is set");
  }
  if (cfg.batch == 0 || cfg.epochs == 0) throw ConfigError("batch and epochs must be positive");
  ScheduleConfig sched = cfg.schedule;
  sched.total_epochs = static_cast<double>(cfg.epochs);
  sched.validate();

  const Split split = split_indices(ds.size(), cfg.train_fraction);
  if (split.train.empty()) throw ConfigError("CE training split is empty");

  CEResult result;
  CEModel& model = result.model;
  model.net = Extrapolator(mc, derive_seed(cfg.seed, {1}));
  model.feature_case = cfg.feature_case;
  model.gt_pdp = cfg.gt_pdp;
  if (mc.uses_multipath() && !cfg.gt_pdp) model.c2p = std::move(c2p);

  const std::vector<FeatureGrid> features = all_features(model, ds);
  {
    std::vector<double> csi_values;
    for (std::size_t i : split.train) {
      const auto& h = ds.samples[i].csi;
      csi_values.insert(csi_values.end(), h.re.begin(), h.re.end());
      csi_values.insert(csi_values.end(), h.im.begin(), h.im.end());
    }
    model.norm.csi = zscore_fit(csi_values);
    if (mc.uses_multipath()) {
      std::vector<FeatureGrid> train_features;
      for (std::size_t i : split.train) train_features.push_back(features[i]);
      model.norm.mp = zscore_fit_features(train_features);
    }
  }

  Adam opt(model.net.parameters(),
           AdamConfig{sched.base_lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay, true});
  GradTape tape;
  Rng rng(derive_seed(cfg.seed, {2}));
  const std::size_t n_sub = ds.carrier.n_subcarriers;
  const std::vector<CEBatchItem> test_items = eval_items(ds, split.test, cfg.test_slices);
  const std::uint64_t test_seed = derive_seed(cfg.seed, {3});

  std::vector<std::size_t> subs = iota_n(n_sub);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<CEBatchItem> items;
    for (std::size_t i : split.train) {
      if (cfg.slices_per_sample == 0 || cfg.slices_per_sample >= n_sub) {
        for (std::size_t n = 0; n < n_sub; ++n) items.push_back({i, n});
      } else {
        std::shuffle(subs.begin(), subs.end(), rng);
        for (std::size_t j = 0; j < cfg.slices_per_sample; ++j) items.push_back({i, subs[j]});
      }
    }
    std::shuffle(items.begin(), items.end(), rng);
    const std::size_t n_batches = (items.size() + cfg.batch - 1) / cfg.batch;
    double lr = lr_at(static_cast<double>(epoch), sched);
    double total = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      if (cfg.step_schedule) {
        lr = lr_at(static_cast<double>(epoch - 1) +
                       static_cast<double>(b + 1) / static_cast<double>(n_batches), sched);
      }
      opt.set_lr(lr);
      const std::size_t start = b * cfg.batch;
      const std::size_t n = std::min(cfg.batch, items.size() - start);
      const auto span = std::span<const CEBatchItem>(items).subspan(start, n);
      const auto plans = make_batch_plans(n, mc.tokens(), cfg.mask_ratio, rng);
      total += static_cast<double>(n) * tape_step(
                   tape, opt,
                   [&] {
                     Tensor loss;
                     batch_loss(model, ds, features, span, plans, true, rng, &loss);
                     return loss;
                   },
                   "CE", epoch, b);
    }
    HistoryRow row{epoch, total / static_cast<double>(items.size()),
                   test_items.empty() ? 0.0
                                      : eval_loss_with(model, ds, features, test_items, cfg.mask_ratio, test_seed),
                   lr};
    result.history.push_back(row);
    if (cfg.verbose) {
      std::fprintf(stderr, "ce epoch %zu train %.6g test %.6g lr %.3g\n", epoch, row.train_loss,
                   row.test_loss, row.lr);
    }
  }
  return result;
}

Checkpoint ce_checkpoint(const CEModel& model) {
  Checkpoint ckpt;
  ckpt.kind = "ce";
  write_from(ckpt.config, model.net.config());
  ckpt.config.set("ce.feature_case", to_string(model.feature_case));
  ckpt.config.set("ce.gt_pdp", model.gt_pdp ? "true" : "false");
  ckpt.config.set("ce.has_c2p", model.c2p ? "true" : "false");
  ckpt.stats.emplace_back("csi", model.norm.csi);
  for (std::size_t c = 0; c < model.norm.mp.size(); ++c) {
    ckpt.stats.emplace_back("mp" + std::to_string(c), model.norm.mp[c]);
  }
  append_parameters(ckpt, model.net.parameters(), "net.");
  if (model.c2p) append_c2p(ckpt, *model.c2p, "c2p.");
  return ckpt;
}

CEModel ce_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "ce") throw IoError("checkpoint kind '" + ckpt.kind + "' is not an extrapolator");
  ExtrapolatorConfig mc;
  read_into(ckpt.config, mc);
  CEModel model;
  model.net = Extrapolator(mc, 0);
  assign_parameters(ckpt, model.net.parameters(), "net.");
  model.feature_case = parse_feature_case(ckpt.config.get("ce.feature_case", "proposed"));
  model.gt_pdp = ckpt.config.get("ce.gt_pdp", false);
  model.norm.csi = ckpt.stat("csi");
  if (mc.uses_multipath()) {
    for (std::size_t c = 0; c < mc.mp_channels; ++c) model.norm.mp.push_back(ckpt.stat("mp" + std::to_string(c)));
  }
  if (ckpt.config.get("ce.has_c2p", false)) model.c2p = c2p_from_checkpoint(ckpt, "c2p.");
  return model;
}

}  // namespace cext
