#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cext/channel.hpp"

namespace cext {

struct EffectivePath {
  double power = 0.0;
  double delay = 0.0;
};

/// Bins whose power is strictly above one third of the peak, in ascending
/// delay order. Throws EmptyProfileError when no bin is positive.
std::vector<EffectivePath> effective_paths(const PowerDelayProfile& pdp);

struct MultipathSummary {
  double total_power = 0.0;
  double weighted_delay = 0.0;
};

/// Total effective power and power-weighted mean delay.
MultipathSummary extract_features(const PowerDelayProfile& pdp);

enum class FeatureCase { Proposed, Case1, Case2, Case3, Case4, Average };

FeatureCase parse_feature_case(const std::string& name);
std::string to_string(FeatureCase c);
/// 2 for the single-pair summaries, 4 for the concatenated cases.
std::size_t feature_channels(FeatureCase c);

/// Multipath features on the antenna grid, laid out [channel][m][k] with
/// channels (power, delay[, power, delay]).
struct FeatureGrid {
  std::size_t channels = 0;
  std::size_t n_rx = 0;
  std::size_t n_tx = 0;
  std::vector<double> values;

  double at(std::size_t c, std::size_t m, std::size_t k) const {
    return values[(c * n_rx + m) * n_tx + k];
  }
};

/// Builds one feature variant from per-pair PDPs. Delays are in seconds.
FeatureGrid build_variant(const PdpGrid& pdps, FeatureCase which);

/// Whole-array Z-score statistics for one modality.
struct NormStats {
  double mean = 0.0;
  double std = 1.0;
  double eps = 1e-12;

  double apply(double x) const { return (x - mean) / std; }
  double invert(double z) const { return z * std + mean; }
};

/// Mean and (population) standard deviation of `values`; the standard
/// deviation is clamped to eps for constant data.
NormStats zscore_fit(std::span<const double> values, double eps = 1e-12);
std::vector<double> zscore_apply(std::span<const double> values, const NormStats& stats);

/// Per-channel statistics for feature grids; channel c of every grid shares
/// one (mean, std) pair.
std::vector<NormStats> zscore_fit_features(std::span<const FeatureGrid> grids, double eps = 1e-12);

}  // namespace cext
