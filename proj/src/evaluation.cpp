#include "cext/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "cext/error.hpp"

namespace cext {
namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

std::vector<CEBatchItem> items_for(const Dataset& ds, const std::vector<std::size_t>& indices,
                                   std::size_t slices) {
  std::vector<CEBatchItem> items;
  const auto subs = spaced_slices(ds.carrier.n_subcarriers, slices);
  for (std::size_t i : indices) {
    for (std::size_t n : subs) items.push_back({i, n});
  }
  return items;
}

}  // namespace

double nmse_db(double err, double ref) {
  if (!(ref > 0)) throw ContractError("NMSE reference energy must be positive");
  if (err <= 0) return kNmseFloorDb;
  return std::max(kNmseFloorDb, 10.0 * std::log10(err / ref));
}

double nmse_db(std::span<const double> estimate, std::span<const double> reference) {
  if (estimate.size() != reference.size()) {
    throw DimensionError("NMSE inputs differ in length: " + std::to_string(estimate.size()) + " vs " +
                         std::to_string(reference.size()));
  }
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    err += (estimate[i] - reference[i]) * (estimate[i] - reference[i]);
    ref += reference[i] * reference[i];
  }
  return nmse_db(err, ref);
}

std::vector<EvalRow> evaluate(const CEModel& model, const Dataset& ds, const EvalConfig& cfg,
                              const std::string& variant, const std::string& dataset) {
  const auto& mc = model.net.config();
  if (ds.geometry.n_rx != mc.n_rx || ds.geometry.n_tx != mc.n_tx) {
    throw DimensionError("dataset array " + std::to_string(ds.geometry.n_rx) + "x" +
                         std::to_string(ds.geometry.n_tx) + " does not match the model");
  }
  if (cfg.mask_seeds == 0) throw ConfigError("at least one mask seed is required");
  std::vector<std::size_t> indices;
  if (cfg.split == "all") {
    for (std::size_t i = 0; i < ds.size(); ++i) indices.push_back(i);
  } else if (cfg.split == "test") {
    indices = split_indices(ds.size(), cfg.train_fraction).test;
  } else {
    throw ConfigError("unknown split '" + cfg.split + "' (test, all)");
  }
  if (indices.empty()) throw ConfigError("evaluation split is empty");

  std::vector<FeatureGrid> features;
  if (mc.uses_multipath()) {
    features.resize(ds.size());
    for (std::size_t i : indices) features[i] = sample_features(model, ds.samples[i]);
  }
  const std::vector<CEBatchItem> items = items_for(ds, indices, cfg.slices);
  const std::size_t plane = mc.n_rx * mc.n_tx;
  const std::size_t chunk = 64;

  std::vector<EvalRow> rows;
  for (double pct : cfg.percentages) {
    if (!(pct > 0 && pct <= 100)) throw ConfigError("known-CSI percentage must lie in (0, 100]");
    const double rho = 1.0 - pct / 100.0;
    std::vector<double> seed_masked, seed_full, slice_db;
    for (std::size_t s = 0; s < cfg.mask_seeds; ++s) {
      Rng plan_rng(derive_seed(cfg.seed, {s, static_cast<std::uint64_t>(std::llround(pct * 1000))}));
      std::vector<MaskPlan> plans;
      plans.reserve(items.size());
      for (std::size_t i = 0; i < items.size(); ++i) plans.push_back(make_mask_plan(mc.tokens(), rho, plan_rng));

      NormalizationSet norm = model.norm;
      if (cfg.refit_norm) {
        std::vector<double> visible;
        for (std::size_t i = 0; i < items.size(); ++i) {
          const auto w = masked_cell_weights(std::span<const MaskPlan>(&plans[i], 1), 2, mc.n_rx, mc.n_tx, mc.patch);
          const ChannelMatrix& h = ds.samples[items[i].sample].csi;
          for (std::size_t c = 0; c < plane; ++c) {
            if (w[c] == 0) {
              const std::size_t src = h.index(c / mc.n_tx, c % mc.n_tx, items[i].subcarrier);
              visible.push_back(h.re[src]);
              visible.push_back(h.im[src]);
            }
          }
        }
        norm.csi = zscore_fit(visible);
        if (mc.uses_multipath()) {
          std::vector<FeatureGrid> used;
          for (std::size_t i : indices) used.push_back(features[i]);
          norm.mp = zscore_fit_features(used);
        }
      }

      double err_m = 0.0, ref_m = 0.0, err_f = 0.0, ref_f = 0.0;
      for (std::size_t start = 0; start < items.size(); start += chunk) {
        const std::size_t n = std::min(chunk, items.size() - start);
        const auto span = std::span<const CEBatchItem>(items).subspan(start, n);
        const auto pspan = std::span<const MaskPlan>(plans).subspan(start, n);
        const Tensor truth = csi_tensor(ds, span, nullptr);
        Tensor mp;
        if (mc.uses_multipath()) mp = feature_tensor(features, span, nullptr);
        const Tensor est = extrapolate(model.net, norm, truth, mp, pspan, true);
        const auto w = masked_cell_weights(pspan, 2, mc.n_rx, mc.n_tx, mc.patch);
        for (std::size_t b = 0; b < n; ++b) {
          double e_slice = 0.0, r_slice = 0.0;
          for (std::size_t j = b * 2 * plane; j < (b + 1) * 2 * plane; ++j) {
            const double d = est[j] - truth[j];
            const double r = truth[j] * truth[j];
            err_f += d * d;
            ref_f += r;
            if (w[j] > 0) {
              err_m += d * d;
              ref_m += r;
              e_slice += d * d;
              r_slice += r;
            }
          }
          if (r_slice > 0) slice_db.push_back(nmse_db(e_slice, r_slice));
        }
      }
      seed_masked.push_back(ref_m > 0 ? nmse_db(err_m, ref_m) : kNmseFloorDb);
      seed_full.push_back(nmse_db(err_f, ref_f));
    }
    EvalRow row;
    row.variant = variant;
    row.dataset = dataset;
    row.percent = pct;
    row.mask_ratio = rho;
    row.mask_seeds = cfg.mask_seeds;
    row.n_samples = indices.size();
    row.n_slices = items.size();
    row.nmse_masked_db = mean_of(seed_masked);
    row.nmse_full_db = mean_of(seed_full);
    row.masked_seed_std_db = std_of(seed_masked);
    row.masked_slice_std_db = std_of(slice_db);
    rows.push_back(row);
  }
  return rows;
}

std::string eval_csv(const std::vector<EvalRow>& rows, const std::string& axis) {
  std::string out = axis.empty() ? "" : "axis,";
  out += "variant,dataset,known_percent,mask_ratio,mask_seeds,n_samples,n_slices,nmse_masked_db,"
         "nmse_full_db,masked_seed_std_db,masked_slice_std_db\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s%s%s,%s,%g,%.6g,%zu,%zu,%zu,%.6f,%.6f,%.6f,%.6f\n", axis.c_str(),
                  axis.empty() ? "" : ",", r.variant.c_str(), r.dataset.c_str(), r.percent, r.mask_ratio,
                  r.mask_seeds, r.n_samples, r.n_slices, r.nmse_masked_db, r.nmse_full_db,
                  r.masked_seed_std_db, r.masked_slice_std_db);
    out += buf;
  }
  return out;
}

std::string eval_table(const std::vector<EvalRow>& rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %-12s %6s %14s %12s\n", "variant", "dataset", "known%", "masked NMSE dB",
                "full NMSE dB");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-16s %-12s %6g %14.3f %12.3f\n", r.variant.c_str(), r.dataset.c_str(),
                  r.percent, r.nmse_masked_db, r.nmse_full_db);
    out += buf;
  }
  return out;
}

std::vector<EvalRow> ablate(const std::vector<std::pair<std::string, const CEModel*>>& models,
                            const std::vector<std::pair<std::string, const Dataset*>>& datasets,
                            const EvalConfig& cfg) {
  if (models.empty() || datasets.empty()) throw ConfigError("ablation needs at least one model and dataset");
  std::vector<EvalRow> rows;
  for (const auto& [mname, model] : models) {
    for (const auto& [dname, ds] : datasets) {
      const auto r = evaluate(*model, *ds, cfg, mname, dname);
      rows.insert(rows.end(), r.begin(), r.end());
    }
  }
  return rows;
}

std::vector<BenchRow> bench(const std::vector<std::pair<std::string, const CEModel*>>& models,
                            const Dataset& ds, const std::vector<double>& percentages, std::size_t runs,
                            std::size_t warmup, std::uint64_t seed) {
  if (runs == 0) throw ConfigError("bench needs at least one timed run");
  if (ds.size() == 0) throw ConfigError("bench dataset is empty");
  std::vector<BenchRow> rows;
  for (double pct : percentages) {
    for (const auto& [name, model] : models) {
      const auto& mc = model->net.config();
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(std::llround(pct * 1000))}));
      std::vector<double> ms;
      for (std::size_t it = 0; it < warmup + runs; ++it) {
        const CEBatchItem item{it % ds.size(), (it * 7) % ds.carrier.n_subcarriers};
        const std::vector<MaskPlan> plan{make_mask_plan(mc.tokens(), 1.0 - pct / 100.0, rng)};
        const Tensor csi = csi_tensor(ds, std::span<const CEBatchItem>(&item, 1), nullptr);
        Tensor mp;
        std::vector<FeatureGrid> features;
        if (mc.uses_multipath()) {
          features.resize(ds.size());
          features[item.sample] = sample_features(*model, ds.samples[item.sample]);
          mp = feature_tensor(features, std::span<const CEBatchItem>(&item, 1), nullptr);
        }
        const auto t0 = std::chrono::steady_clock::now();
        const Tensor out = extrapolate(model->net, model->norm, csi, mp, plan, true);
        const auto t1 = std::chrono::steady_clock::now();
        if (!std::isfinite(out[0])) throw NumericError("non-finite extrapolation output in bench");
        if (it >= warmup) ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      }
      rows.push_back({pct, name, mean_of(ms), std_of(ms), runs, warmup});
    }
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "known_percent,variant,mean_ms,std_ms,runs,warmup\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%g,%s,%.6f,%.6f,%zu,%zu\n", r.percent, r.variant.c_str(), r.mean_ms,
                  r.std_ms, r.runs, r.warmup);
    out += buf;
  }
  return out;
}

}  // namespace cext
