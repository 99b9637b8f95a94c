#include "cext/features.hpp"

#include <algorithm>
#include <cmath>

#include "cext/error.hpp"

namespace cext {

std::vector<EffectivePath> effective_paths(const PowerDelayProfile& pdp) {
  double peak = 0.0;
  for (double p : pdp.bins) peak = std::max(peak, p);
  if (!(peak > 0.0)) throw EmptyProfileError("power delay profile has no positive bin");
  const double threshold = peak / 3.0;
  std::vector<EffectivePath> out;
  for (std::size_t i = 0; i < pdp.bins.size(); ++i) {
    if (pdp.bins[i] > threshold) out.push_back({pdp.bins[i], pdp.delay_of(i)});
  }
  return out;
}

MultipathSummary extract_features(const PowerDelayProfile& pdp) {
  const auto paths = effective_paths(pdp);
  double total = 0.0, moment = 0.0;
  for (const auto& p : paths) {
    total += p.power;
    moment += p.power * p.delay;
  }
  return {total, moment / total};
}

FeatureCase parse_feature_case(const std::string& name) {
  if (name == "proposed") return FeatureCase::Proposed;
  if (name == "case1") return FeatureCase::Case1;
  if (name == "case2") return FeatureCase::Case2;
  if (name == "case3") return FeatureCase::Case3;
  if (name == "case4") return FeatureCase::Case4;
  if (name == "average") return FeatureCase::Average;
  throw ConfigError("unknown feature case '" + name +
                    "' (proposed, case1, case2, case3, case4, average)");
}

std::string to_string(FeatureCase c) {
  switch (c) {
    case FeatureCase::Proposed: return "proposed";
    case FeatureCase::Case1: return "case1";
    case FeatureCase::Case2: return "case2";
    case FeatureCase::Case3: return "case3";
    case FeatureCase::Case4: return "case4";
    case FeatureCase::Average: return "average";
  }
  return "?";
}

std::size_t feature_channels(FeatureCase c) {
  return (c == FeatureCase::Case3 || c == FeatureCase::Case4) ? 4 : 2;
}

namespace {

// Earliest effective path ("first identified").
EffectivePath first_path(const std::vector<EffectivePath>& eff) { return eff.front(); }

// Strongest path; the earliest wins ties.
EffectivePath strongest_path(const std::vector<EffectivePath>& eff) {
  EffectivePath best = eff.front();
  for (const auto& p : eff) {
    if (p.power > best.power) best = p;
  }
  return best;
}

}  // namespace

FeatureGrid build_variant(const PdpGrid& pdps, FeatureCase which) {
  FeatureGrid g;
  g.channels = feature_channels(which);
  g.n_rx = pdps.n_rx;
  g.n_tx = pdps.n_tx;
  const std::size_t plane = g.n_rx * g.n_tx;
  if (pdps.profiles.size() != plane) throw DimensionError("PDP grid size does not match its dims");
  g.values.assign(g.channels * plane, 0.0);
  auto put = [&](std::size_t c, std::size_t pair, double v) { g.values[c * plane + pair] = v; };

  for (std::size_t pair = 0; pair < plane; ++pair) {
    const auto eff = effective_paths(pdps.profiles[pair]);
    double total = 0.0, moment = 0.0;
    for (const auto& p : eff) {
      total += p.power;
      moment += p.power * p.delay;
    }
    const MultipathSummary proposed{total, moment / total};
    switch (which) {
      case FeatureCase::Proposed:
      case FeatureCase::Average:
        put(0, pair, proposed.total_power);
        put(1, pair, proposed.weighted_delay);
        break;
      case FeatureCase::Case1:
      case FeatureCase::Case2: {
        const EffectivePath p = which == FeatureCase::Case1 ? first_path(eff) : strongest_path(eff);
        put(0, pair, p.power);
        put(1, pair, p.delay);
        break;
      }
      case FeatureCase::Case3:
      case FeatureCase::Case4: {
        const EffectivePath p = which == FeatureCase::Case3 ? first_path(eff) : strongest_path(eff);
        put(0, pair, proposed.total_power);
        put(1, pair, proposed.weighted_delay);
        put(2, pair, p.power);
        put(3, pair, p.delay);
        break;
      }
    }
  }

  if (which == FeatureCase::Average) {
    for (std::size_t c = 0; c < g.channels; ++c) {
      double s = 0.0;
      for (std::size_t pair = 0; pair < plane; ++pair) s += g.values[c * plane + pair];
      const double avg = s / static_cast<double>(plane);
      std::fill_n(g.values.begin() + static_cast<std::ptrdiff_t>(c * plane), plane, avg);
    }
  }
  return g;
}

NormStats zscore_fit(std::span<const double> values, double eps) {
  NormStats st;
  st.eps = eps;
  if (values.empty()) return st;
  double s = 0.0;
  for (double v : values) s += v;
  st.mean = s / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - st.mean) * (v - st.mean);
  st.std = std::max(std::sqrt(ss / static_cast<double>(values.size())), eps);
  return st;
}

std::vector<double> zscore_apply(std::span<const double> values, const NormStats& stats) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = stats.apply(values[i]);
  return out;
}

std::vector<NormStats> zscore_fit_features(std::span<const FeatureGrid> grids, double eps) {
  if (grids.empty()) return {};
  const std::size_t channels = grids.front().channels;
  std::vector<NormStats> stats;
  for (std::size_t c = 0; c < channels; ++c) {
    std::vector<double> vals;
    for (const auto& g : grids) {
      const std::size_t plane = g.n_rx * g.n_tx;
      vals.insert(vals.end(), g.values.begin() + static_cast<std::ptrdiff_t>(c * plane),
                  g.values.begin() + static_cast<std::ptrdiff_t>((c + 1) * plane));
    }
    stats.push_back(zscore_fit(vals, eps));
  }
  return stats;
}

}  // namespace cext
