#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cext/c2p.hpp"
#include "cext/checkpoint.hpp"
#include "cext/dataset.hpp"
#include "cext/extrapolator.hpp"
#include "cext/optim.hpp"

namespace cext {

struct HistoryRow {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double test_loss = 0.0;
  double lr = 0.0;
};
using History = std::vector<HistoryRow>;

/// CSV with header "epoch,train_loss,test_loss,lr".
std::string history_csv(const History& history);
void write_history_csv(const std::string& path, const History& history);

// ---------------------------------------------------------------- C2P

/// One (PDP, CSI) pair per row, in physical units.
struct C2PData {
  std::vector<std::vector<double>> pdp;
  std::vector<std::vector<double>> csi;
  std::size_t size() const { return pdp.size(); }
};

/// One antenna pair per channel sample, chosen with derive_seed(seed, {i}).
C2PData c2p_pairs(const Dataset& ds, const std::vector<std::size_t>& indices, std::uint64_t seed);

struct C2PTrainConfig {
  std::size_t epochs = 400;
  std::size_t batch = 100;
  std::size_t hidden = 512;
  double lr = 1e-4;
  /// Normalise each sample by its own power (C2PConfig::per_sample).
  bool per_sample = true;
  /// Compression reference p0: a fraction of the sample's total power when
  /// per_sample, else of the mean per-sample peak bin.
  double pdp_ref = 0.005;
  /// Nonzero switches the optimiser to AdamW with this decoupled decay.
  double weight_decay = 0.0;
  /// Weight of an extra term ||P - f_D(x)||^2 that fits the decoder on the
  /// measured CSI as well. 0 keeps the plain joint loss.
  double measured_weight = 0.0;
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
  bool verbose = false;
};

struct C2PResult {
  C2PModel model;
  History history;
};

/// Fits the C2P scales on `train`, then runs Adam on the joint loss.
C2PResult train_c2p(const C2PData& train, const C2PData& test, const C2PTrainConfig& cfg);
C2PResult train_c2p(const Dataset& ds, const C2PTrainConfig& cfg);

/// Joint loss on a data set, in the network's units.
double c2p_eval_loss(const C2PModel& model, const C2PData& data);
/// 10 log10(sum ||P - f_D(f_E(P))||^2 / sum ||P||^2) in physical power units.
double c2p_pdp_nmse_db(const C2PModel& model, const C2PData& data);
/// sum ||f_E(P) - x||^2 / sum ||x||^2 (physical units, linear ratio).
/// Same NMSE for PDPs inferred from the measured CSI.
double c2p_infer_nmse_db(const C2PModel& model, const C2PData& data);
double c2p_latent_nmse(const C2PModel& model, const C2PData& data);
/// Fraction of samples whose inferred PDP (from the true CSI) has total
/// power within `tolerance` (relative) of the ground truth.
double c2p_power_within(const C2PModel& model, const C2PData& data, double tolerance);

Checkpoint c2p_checkpoint(const C2PModel& model, const std::string& prefix = "");
void append_c2p(Checkpoint& ckpt, const C2PModel& model, const std::string& prefix);
C2PModel c2p_from_checkpoint(const Checkpoint& ckpt, const std::string& prefix = "");

// ---------------------------------------------------------------- CE

/// A trained extrapolator together with everything needed to feed it.
struct CEModel {
  Extrapolator net;
  NormalizationSet norm;
  FeatureCase feature_case = FeatureCase::Proposed;
  bool gt_pdp = false;
  std::optional<C2PModel> c2p;
};

/// Multipath features of one channel sample, from the ground-truth PDPs or
/// from PDPs inferred out of its CSI.
FeatureGrid sample_features(const CEModel& model, const DatasetSample& sample);

struct CETrainConfig {
  ExtrapolatorConfig model;
  FeatureCase feature_case = FeatureCase::Proposed;
  bool gt_pdp = false;
  std::size_t epochs = 400;
  std::size_t batch = 100;
  ScheduleConfig schedule;
  bool step_schedule = false;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double mask_ratio = 0.75;
  /// Random subcarriers drawn per sample and epoch (0 = all).
  std::size_t slices_per_sample = 4;
  /// Fixed subcarriers per test sample for the test loss (0 = all).
  std::size_t test_slices = 4;
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
  bool verbose = false;
};

struct CEResult {
  CEModel model;
  History history;
};

/// Trains the extrapolator on the train split. Without gt_pdp a trained C2P
/// model is required; it stays frozen.
CEResult train_ce(const Dataset& ds, std::optional<C2PModel> c2p, const CETrainConfig& cfg);

/// Mean masked MSE (normalised units) over the given samples with plans
/// drawn from `seed`.
double ce_eval_loss(const CEModel& model, const Dataset& ds, const std::vector<std::size_t>& indices,
                    double mask_ratio, std::size_t slices, std::uint64_t seed);

Checkpoint ce_checkpoint(const CEModel& model);
CEModel ce_from_checkpoint(const Checkpoint& ckpt);

/// Evenly spaced subcarrier indices (all when count is 0 or >= n_sub).
std::vector<std::size_t> spaced_slices(std::size_t n_sub, std::size_t count);

/// Normalised [B,2,M,K] CSI and [B,C,M,K] feature tensors for
/// (sample, subcarrier) items.
struct CEBatchItem {
  std::size_t sample;
  std::size_t subcarrier;
};
Tensor csi_tensor(const Dataset& ds, std::span<const CEBatchItem> items, const NormStats* norm);
Tensor feature_tensor(const std::vector<FeatureGrid>& features, std::span<const CEBatchItem> items,
                      const std::vector<NormStats>* norm);

}  // namespace cext
