#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cext/training.hpp"

namespace cext {

inline constexpr double kNmseFloorDb = -120.0;

/// 10 log10(err / ref), clamped below at -120 dB.
double nmse_db(double err, double ref);
/// NMSE of an estimate against a reference of the same length.
double nmse_db(std::span<const double> estimate, std::span<const double> reference);

struct EvalConfig {
  std::vector<double> percentages{5, 10, 15, 20, 25};  // known CSI, percent of tokens
  std::size_t mask_seeds = 3;
  std::uint64_t seed = 1234;
  /// Subcarriers per sample (0 = all), evenly spaced.
  std::size_t slices = 0;
  /// Evaluate on the test split ("test") or every sample ("all").
  std::string split = "test";
  double train_fraction = 0.9;
  /// Re-estimate normalisation from the evaluation inputs (visible CSI
  /// entries and the multipath features) instead of the training stats.
  bool refit_norm = false;
};

struct EvalRow {
  std::string variant;
  std::string dataset;
  double percent = 0.0;
  double mask_ratio = 0.0;
  std::size_t mask_seeds = 0;
  std::size_t n_samples = 0;
  std::size_t n_slices = 0;
  double nmse_masked_db = 0.0;  // mean over mask seeds of the pooled ratio
  double nmse_full_db = 0.0;
  double masked_seed_std_db = 0.0;
  double masked_slice_std_db = 0.0;  // spread of per-slice NMSE over the split
};

std::vector<EvalRow> evaluate(const CEModel& model, const Dataset& ds, const EvalConfig& cfg,
                              const std::string& variant = "model", const std::string& dataset = "data");

std::string eval_csv(const std::vector<EvalRow>& rows, const std::string& axis = "");
/// Fixed-width text table of the same rows.
std::string eval_table(const std::vector<EvalRow>& rows);

/// One row per (model, dataset, percentage).
std::vector<EvalRow> ablate(const std::vector<std::pair<std::string, const CEModel*>>& models,
                            const std::vector<std::pair<std::string, const Dataset*>>& datasets,
                            const EvalConfig& cfg);

struct BenchRow {
  double percent = 0.0;
  std::string variant;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  std::size_t runs = 0;
  std::size_t warmup = 0;
};

/// Single-slice inference latency (extrapolate call only) per percentage
/// for each model. Warmup iterations are excluded from the statistics.
std::vector<BenchRow> bench(const std::vector<std::pair<std::string, const CEModel*>>& models,
                            const Dataset& ds, const std::vector<double>& percentages,
                            std::size_t runs = 200, std::size_t warmup = 20, std::uint64_t seed = 7);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace cext
