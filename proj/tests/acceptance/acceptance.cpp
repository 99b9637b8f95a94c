// Acceptance run: one PASS/FAIL line per criterion, details on the lines
// below it. Exit status is nonzero only when the harness itself breaks.
//
//   cext_acceptance [--only 1,2,...] [--report path.csv]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cext/c2p.hpp"
#include "cext/channel.hpp"
#include "cext/dataset.hpp"
#include "cext/error.hpp"
#include "cext/evaluation.hpp"
#include "cext/extrapolator.hpp"
#include "cext/features.hpp"
#include "cext/masking.hpp"
#include "cext/ops.hpp"
#include "cext/optim.hpp"
#include "cext/training.hpp"
#include "gradcheck.hpp"

using namespace cext;
using cext::testing::max_grad_error;

namespace {

// ------------------------------------------------------------ tolerances

constexpr double kOpGradTol = 1e-4;
constexpr double kModelGradTol = 1e-3;
constexpr double kExactTol = 1e-12;
constexpr double kGradSeconds = 120.0;
constexpr double kOracleSeconds = 60.0;
constexpr double kMaskSeconds = 30.0;
constexpr double kC2PLossRatio = 0.2;
constexpr double kC2PNmseDb = -10.0;
constexpr double kKnownPercent = 10.0;

// ---------------------------------------------------------------- output

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::vector<std::string> details;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void note(Verdict& v, const std::string& line) {
  v.details.push_back(line);
  std::printf("    %s\n", line.c_str());
  std::fflush(stdout);
}

// Tracks the worst value of a check family and whether it stayed in bounds.
struct Worst {
  double value = 0.0;
  std::string where;
  void see(double v, const std::string& w) {
    if (v > value || where.empty()) {
      value = std::max(value, v);
      where = w;
    }
  }
};

Tensor randn(Shape s, Rng& rng, bool grad = true) {
  std::vector<double> v(shape_numel(s));
  for (double& x : v) x = normal(rng);
  Tensor t(std::move(s), std::move(v));
  if (grad) t.set_requires_grad();
  return t;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// ------------------------------------------------------ 1: gradient suite

Verdict gradient_suite() {
  Verdict v{1, "gradient suite"};
  const auto t0 = Clock::now();
  Rng rng(101);
  Worst ops;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t b = pick(rng, 1, 3), r = pick(rng, 1, 4), c = pick(rng, 2, 5), k = pick(rng, 1, 4);
    Tensor a = randn({b, r, c}, rng), m = randn({c, k}, rng), vec = randn({c}, rng), s = randn({b, r, c}, rng);
    Tensor g = randn({c}, rng), be = randn({c}, rng);
    const Tensor w = randn({b, r, k}, rng, false), w2 = randn({b, r, c}, rng, false);
    const Tensor wt = randn({b, c, r}, rng, false);
    ops.see(max_grad_error({{a, {}}, {m, {}}}, [&] { return sum(mul(matmul(a, m), w)); }), "matmul");
    ops.see(max_grad_error({{a, {}}, {vec, {}}}, [&] { return sum(mul(add(a, vec), w2)); }), "add");
    ops.see(max_grad_error({{a, {}}, {s, {}}}, [&] { return sum(mul(sub(a, s), w2)); }), "sub");
    ops.see(max_grad_error({{a, {}}, {s, {}}}, [&] { return sum(mul(mul(a, s), w2)); }), "mul");
    ops.see(max_grad_error({{a, {}}}, [&] { return mean(square(scale(add_scalar(a, 0.3), 1.7))); }),
            "scale/add_scalar/square/mean");
    ops.see(max_grad_error({{a, {}}}, [&] { return sum(mul(softmax_lastdim(a), w2)); }), "softmax");
    ops.see(max_grad_error({{a, {}}, {g, {}}, {be, {}}}, [&] { return sum(mul(layer_norm(a, g, be), w2)); }),
            "layer_norm");
    ops.see(max_grad_error({{a, {}}}, [&] { return sum(mul(gelu(a), w2)); }), "gelu");
    ops.see(max_grad_error({{a, {}}}, [&] { return sum(mul(softplus(a), w2)); }), "softplus");
    ops.see(max_grad_error({{a, {}}}, [&] { return sum(mul(permute(a, {2, 0, 1}), permute(w2, {2, 0, 1}))); }),
            "permute");
    ops.see(max_grad_error({{a, {}}}, [&] { return sum(mul(transpose_last2(a), wt)); }), "transpose");
    ops.see(max_grad_error({{a, {}}, {s, {}}}, [&] { return sum(mul(concat(a, s, 1), concat(w2, w2, 1))); }),
            "concat");
    ops.see(max_grad_error({{vec, {}}}, [&] { return sum(mul(broadcast_to(vec, {b, r, c}), w2)); }), "broadcast_to");

    // token-level ops
    const std::size_t len = pick(rng, 2, 6), d = pick(rng, 1, 3);
    Tensor tok = randn({b, len, d}, rng);
    std::vector<std::vector<std::size_t>> idx(b);
    for (auto& row : idx) row = {pick(rng, 0, len - 1), pick(rng, 0, len - 1)};
    const Tensor wg = randn({b, 2, d}, rng, false);
    ops.see(max_grad_error({{tok, {}}}, [&] { return sum(mul(gather_tokens(tok, idx), wg)); }), "gather_tokens");
    Rng prng(trial);
    const auto plans = make_batch_plans(b, len, 0.5, prng);
    Tensor mtok = randn({d}, rng);
    const Tensor wr = randn({b, len, d}, rng, false);
    ops.see(max_grad_error({{tok, {}}, {mtok, {}}},
                           [&] { return sum(mul(restore_sequence(apply_mask(tok, plans), mtok, plans), wr)); }),
            "apply_mask/restore_sequence");
    Tensor img = randn({b, 2, 4, 6}, rng);
    const Tensor wp = randn({b, 6, 8}, rng, false), wi = randn({b, 2, 4, 6}, rng, false);
    ops.see(max_grad_error({{img, {}}}, [&] { return sum(mul(patchify(img, 2), wp)); }), "patchify");
    ops.see(max_grad_error({{img, {}}}, [&] { return sum(mul(unpatchify(patchify(img, 2), 2, 4, 6, 2), wi)); }),
            "unpatchify");
  }
  note(v, "ops: worst rel. err " + fmt("%.3e", ops.value) + " (" + ops.where + "), tolerance " +
              fmt("%.0e", kOpGradTol));

  Worst model;
  Rng mrng(202);
  for (FusionKind f : {FusionKind::CrossAttention, FusionKind::Swapped, FusionKind::Concat, FusionKind::None}) {
    ExtrapolatorConfig c;
    c.n_rx = 4;
    c.n_tx = 8;
    c.patch = 2;
    c.embed_dim = 16;
    c.encoder_depth = 1;
    c.decoder_depth = 1;
    c.heads = 2;
    c.decoder_dim = 8;
    c.decoder_heads = 2;
    c.ffn_ratio = 2;
    c.droppath = 0.0;
    c.fusion = f;
    const Extrapolator net(c, 10);
    const Tensor csi = randn({2, 2, 4, 8}, mrng, false), mp = randn({2, 2, 4, 8}, mrng, false);
    const auto plans = make_batch_plans(2, 8, 0.5, mrng);
    std::vector<cext::testing::Probe> probes;
    for (const auto& p : net.parameters()) {
      probes.push_back({p.tensor, {std::uniform_int_distribution<std::size_t>(0, p.tensor.numel() - 1)(mrng)}});
    }
    model.see(max_grad_error(probes,
                             [&] {
                               Rng r(3);
                               return masked_mse(net.forward(csi, mp, plans, false, r), csi, plans, 2);
                             }),
              "extrapolator/" + to_string(f));
  }
  {
    C2PConfig c;
    c.n_bins = 16;
    c.csi_dim = 12;
    c.hidden = 24;
    c.pdp_scale = 0.05;
    c.csi_scale = 2.0;
    const C2PModel m(c, 6);
    std::vector<double> p(3 * 16), x(3 * 12);
    for (double& e : p) e = uniform(mrng, 0, 2);
    for (double& e : x) e = normal(mrng);
    const Tensor pdp({3, 16}, p), csi({3, 12}, x);
    std::vector<cext::testing::Probe> probes;
    for (const auto& np : m.parameters()) {
      probes.push_back({np.tensor, {0, np.tensor.numel() / 2, np.tensor.numel() - 1}});
    }
    model.see(max_grad_error(probes,
                             [&] {
                               const Tensor z = m.encode(pdp);
                               return c2p_loss(m.decode(z), pdp, z, csi);
                             }),
              "csi-to-pdp");
  }
  note(v, "end-to-end: worst rel. err " + fmt("%.3e", model.value) + " (" + model.where + "), tolerance " +
              fmt("%.0e", kModelGradTol));
  v.seconds = seconds_since(t0);
  v.pass = ops.value < kOpGradTol && model.value < kModelGradTol && v.seconds < kGradSeconds;
  note(v, "runtime " + fmt("%.1f", v.seconds) + " s, limit " + fmt("%.0f", kGradSeconds) + " s");
  return v;
}

// -------------------------------------------------------- 2: oracle suite

MultipathSummary brute_summary(const PowerDelayProfile& p) {
  double mx = 0;
  for (double x : p.bins) mx = x > mx ? x : mx;
  double tot = 0, num = 0;
  for (std::size_t i = 0; i < p.bins.size(); ++i) {
    if (p.bins[i] > 0 && p.bins[i] > mx / 3) {
      tot += p.bins[i];
      num += p.bins[i] * (static_cast<double>(i) * p.bin_width);
    }
  }
  return {tot, num / tot};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Verdict oracle_suite() {
  Verdict v{2, "oracle suite"};
  const auto t0 = Clock::now();
  Rng rng(303);

  Worst feat, thresh;
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + trial % 64;
    std::vector<double> b(n);
    for (double& x : b) x = uniform01(rng) < 0.4 ? 0.0 : uniform01(rng) * std::pow(10.0, uniform(rng, -6, 0));
    b[trial % n] = 0.5 + uniform01(rng);
    const PowerDelayProfile p{b, 6.25e-9};
    const MultipathSummary got = extract_features(p), want = brute_summary(p);
    feat.see(std::max(rel(got.total_power, want.total_power), rel(got.weighted_delay / 1e-9, want.weighted_delay / 1e-9)),
             "features");
    double mx = 0;
    for (double x : b) mx = std::max(mx, x);
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < n; ++i) {
      if (b[i] > 0 && b[i] > mx / 3) expect.push_back(i);
    }
    const auto eff = effective_paths(p);
    bool same = eff.size() == expect.size();
    for (std::size_t i = 0; same && i < eff.size(); ++i) {
      same = std::abs(eff[i].delay - static_cast<double>(expect[i]) * p.bin_width) <= kExactTol * 1e-9 &&
             eff[i].power == b[expect[i]];
    }
    thresh.see(same ? 0.0 : 1.0, "threshold");
  }
  note(v, "features (total power, weighted delay), 2000 profiles: worst rel. err " + fmt("%.2e", feat.value));
  note(v, "thresholding p > max/3, 2000 profiles: " + std::string(thresh.value == 0.0 ? "all identical" : "MISMATCH"));

  Worst bins;
  const PdpBinning binning{64, 6.25e-9};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Path> paths(1 + trial % 12);
    std::vector<double> oracle(binning.n_bins, 0.0);
    double energy = 0;
    for (Path& p : paths) {
      const std::size_t bin = pick(rng, 0, binning.n_bins - 1);
      p.amplitude = uniform(rng, 0, 2);
      p.delay = (static_cast<double>(bin) + uniform(rng, 0.05, 0.95)) * binning.bin_width;
      oracle[bin] += p.amplitude * p.amplitude;
      energy += p.amplitude * p.amplitude;
    }
    const PowerDelayProfile pdp = ground_truth_pdp(paths, binning);
    double total = 0;
    for (std::size_t i = 0; i < pdp.size(); ++i) {
      bins.see(rel(pdp.bins[i], oracle[i]), "bin");
      total += pdp.bins[i];
    }
    bins.see(rel(total, energy), "power");
  }
  note(v, "PDP binning, 500 path sets: worst rel. err " + fmt("%.2e", bins.value));

  Worst nm;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + t % 200;
    std::vector<double> a(n), b(n);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = normal(rng);
      b[i] = normal(rng);
      num += (a[i] - b[i]) * (a[i] - b[i]);
      den += b[i] * b[i];
    }
    nm.see(std::abs(nmse_db(a, b) - 10 * std::log10(num / den)), "nmse");
  }
  note(v, "NMSE, 500 random pairs: worst abs. err " + fmt("%.2e", nm.value) + " dB");

  // 10 steps on f = 0.5 a w0^2 + 0.5 b w1^2 + c w0 w1, textbook recursion.
  Worst opt;
  const double qa = 3.0, qb = 0.5, qc = 0.4;
  auto grad = [&](double w0, double w1) { return std::pair{qa * w0 + qc * w1, qb * w1 + qc * w0}; };
  for (bool decoupled : {false, true}) {
    for (double wd : {0.0, 0.05}) {
      const AdamConfig cfg{0.05, 0.9, 0.95, 1e-8, wd, decoupled};
      Tensor w = Tensor(Shape{2}, {1.0, -2.0});
      Adam adam({{"w", w, true}}, cfg);
      double rw[2] = {1.0, -2.0}, m[2] = {0, 0}, s[2] = {0, 0};
      for (int t = 1; t <= 10; ++t) {
        adam.zero_grad();
        const auto [g0, g1] = grad(w[0], w[1]);
        w.mutable_grad()[0] = g0;
        w.mutable_grad()[1] = g1;
        adam.step();
        const auto [r0, r1] = grad(rw[0], rw[1]);
        const double rg[2] = {r0, r1};
        for (int i = 0; i < 2; ++i) {
          double gi = rg[i];
          if (decoupled) {
            rw[i] *= 1 - cfg.lr * wd;
          } else {
            gi += wd * rw[i];
          }
          m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * gi;
          s[i] = cfg.beta2 * s[i] + (1 - cfg.beta2) * gi * gi;
          const double mh = m[i] / (1 - std::pow(cfg.beta1, t)), sh = s[i] / (1 - std::pow(cfg.beta2, t));
          rw[i] -= cfg.lr * mh / (std::sqrt(sh) + cfg.eps);
        }
      }
      opt.see(std::max(std::abs(w[0] - rw[0]), std::abs(w[1] - rw[1])), decoupled ? "adamw" : "adam");
    }
  }
  note(v, "Adam/AdamW, 10 steps x 4 configs: worst abs. err " + fmt("%.2e", opt.value));

  v.seconds = seconds_since(t0);
  v.pass = feat.value <= kExactTol && thresh.value == 0.0 && bins.value <= kExactTol && nm.value <= kExactTol &&
           opt.value <= kExactTol && v.seconds < kOracleSeconds;
  note(v, "tolerance " + fmt("%.0e", kExactTol) + "; runtime " + fmt("%.2f", v.seconds) + " s, limit " +
              fmt("%.0f", kOracleSeconds) + " s");
  return v;
}

// ------------------------------------------------------- 3: masking suite

Verdict masking_suite() {
  Verdict v{3, "masking suite"};
  const auto t0 = Clock::now();
  Rng rng(404);
  std::size_t plans_checked = 0, failures = 0;
  auto expect = [&](bool ok) { failures += ok ? 0 : 1; };
  for (std::size_t total = 1; total <= 64; ++total) {
    for (double rho : {0.0, 0.25, 0.5, 0.75, 0.9, 0.95}) {
      for (int rep = 0; rep < 4; ++rep) {
        const MaskPlan p = make_mask_plan(total, rho, rng);
        ++plans_checked;
        const std::size_t keep =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(total) * (1 - rho) + 1e-9)));
        // count exactness
        expect(p.keep == keep && p.ids_keep.size() == keep);
        expect(static_cast<std::size_t>(std::count(p.binary_mask.begin(), p.binary_mask.end(), 1)) == total - keep);
        // sort consistency: ascending noise, ties by index, keep = prefix
        for (std::size_t j = 1; j < total; ++j) {
          const double a = p.noise[p.ids_shuffle[j - 1]], b = p.noise[p.ids_shuffle[j]];
          expect(a < b || (a == b && p.ids_shuffle[j - 1] < p.ids_shuffle[j]));
        }
        expect(std::equal(p.ids_keep.begin(), p.ids_keep.end(), p.ids_shuffle.begin()));
        for (std::size_t j = 0; j < total; ++j) expect(p.ids_restore[p.ids_shuffle[j]] == j);
        for (std::size_t i = 0; i < total; ++i) {
          const bool kept = std::find(p.ids_keep.begin(), p.ids_keep.end(), i) != p.ids_keep.end();
          expect((p.binary_mask[i] == 0) == kept);
        }
        // restore round trip and shared-plan identity on two streams
        const std::vector<MaskPlan> plans{p};
        std::vector<double> xs(total * 3), ys(total * 3);
        for (std::size_t i = 0; i < xs.size(); ++i) {
          xs[i] = static_cast<double>(i);
          ys[i] = -static_cast<double>(i) - 0.5;
        }
        const Tensor x(Shape{1, total, 3}, xs), y(Shape{1, total, 3}, ys);
        const Tensor vx = apply_mask(x, plans), vy = apply_mask(y, plans);
        const Tensor token(Shape{3}, {-1, -2, -3});
        const Tensor back = restore_sequence(vx, token, plans);
        for (std::size_t i = 0; i < total; ++i) {
          for (std::size_t d = 0; d < 3; ++d) {
            expect(back[i * 3 + d] == (p.binary_mask[i] ? token[d] : x[i * 3 + d]));
          }
        }
        for (std::size_t i = 0; i < vx.numel(); ++i) expect(vy[i] == -vx[i] - 0.5);
      }
    }
  }
  v.seconds = seconds_since(t0);
  v.pass = failures == 0 && v.seconds < kMaskSeconds;
  note(v, std::to_string(plans_checked) + " plans over L = 1..64 x rho in {0, .25, .5, .75, .9, .95}: " +
              std::to_string(failures) + " violations");
  note(v, "runtime " + fmt("%.2f", v.seconds) + " s, limit " + fmt("%.0f", kMaskSeconds) + " s");
  return v;
}

// ----------------------------------------------- 4: CSI-to-PDP training

GenerateConfig c2p_data_config() {
  GenerateConfig g;
  g.scenario.kind = ScenarioKind::Street;
  g.geometry.n_rx = 1;
  g.geometry.n_tx = 1;
  g.carrier.n_subcarriers = 200;
  g.scenario.coherent_phase = true;
  g.scenario.delay_grid = 6.25e-9;
  g.scenario.jitter_log_amp = 0.0;
  g.scenario.jitter_phase = 0.0;
  g.scenario.jitter_delay = 0.0;
  g.binning = PdpBinning::for_carrier(g.carrier);
  g.n_samples = 2000;
  g.seed = 4;
  return g;
}

Verdict c2p_training() {
  Verdict v{4, "CSI-to-PDP training"};
  const auto t0 = Clock::now();
  const Dataset ds = generate_dataset(c2p_data_config());
  C2PTrainConfig cfg;
  cfg.seed = 4;
  const Split split = split_indices(ds.size(), cfg.train_fraction);
  const C2PData train = c2p_pairs(ds, split.train, cfg.seed), test = c2p_pairs(ds, split.test, cfg.seed);
  const C2PResult r = train_c2p(train, test, cfg);
  const double first = r.history.front().train_loss, last = r.history.back().train_loss;
  const double nmse = c2p_pdp_nmse_db(r.model, test);
  v.seconds = seconds_since(t0);
  note(v, std::to_string(ds.size()) + " samples (" + std::to_string(train.size()) + " train / " +
              std::to_string(test.size()) + " held out), " + std::to_string(cfg.epochs) + " epochs");
  note(v, "loss epoch 1 " + fmt("%.4g", first) + " -> epoch " + std::to_string(r.history.size()) + " " +
              fmt("%.4g", last) + " (ratio " + fmt("%.4f", last / first) + ", limit " + fmt("%.2f", kC2PLossRatio) + ")");
  note(v, "held-out PDP reconstruction NMSE " + fmt("%.2f", nmse) + " dB (limit " + fmt("%.0f", kC2PNmseDb) + " dB)");
  note(v, "held-out PDP inferred from measured CSI: NMSE " + fmt("%.2f", c2p_infer_nmse_db(r.model, test)) +
              " dB, latent NMSE " + fmt("%.4f", c2p_latent_nmse(r.model, test)) + ", total power within 20%: " +
              fmt("%.3f", c2p_power_within(r.model, test, 0.2)));
  note(v, "runtime " + fmt("%.0f", v.seconds) + " s (target 1200 s)");
  v.pass = last < kC2PLossRatio * first && nmse < kC2PNmseDb;
  return v;
}

// --------------------------------------------- 5-8: channel extrapolation

constexpr std::size_t kRepeats = 3;
constexpr std::size_t kCeSamples = 500;
constexpr std::size_t kEvalSlices = 8;
constexpr std::uint64_t kCeDataSeed = 1;

GenerateConfig ce_data_config() {
  GenerateConfig g;
  g.scenario.kind = ScenarioKind::Street;
  g.scenario.wall_reflection = 0.2;
  g.scenario.ground_reflection = 0.2;
  g.scenario.scatterer_gain = 0.1;
  g.scenario.jitter_log_amp = 0.3;
  g.scenario.jitter_phase = 0.05;
  g.scenario.jitter_delay = 0.3e-9;
  g.carrier.n_subcarriers = 64;
  g.binning = PdpBinning::for_carrier(g.carrier);
  g.n_samples = kCeSamples;
  g.seed = kCeDataSeed;
  return g;
}

CETrainConfig ce_train_config(FusionKind fusion, FeatureCase fc, std::uint64_t seed) {
  CETrainConfig c;
  c.model.embed_dim = 32;
  c.model.encoder_depth = 2;
  c.model.decoder_dim = 32;
  c.model.decoder_depth = 1;
  c.model.droppath = 0.0;
  c.model.fusion = fusion;
  c.feature_case = fc;
  c.gt_pdp = true;
  c.epochs = 150;
  c.schedule.warmup_epochs = 10;
  c.schedule.total_epochs = 150;
  c.mask_ratio = 0.9;
  c.seed = seed;
  return c;
}

EvalConfig ce_eval_config() {
  EvalConfig e;
  e.percentages = {kKnownPercent};
  e.slices = kEvalSlices;
  return e;
}

struct Variant {
  std::string name;
  FusionKind fusion;
  FeatureCase features;
};

const std::vector<Variant> kVariants{
    {"proposed", FusionKind::CrossAttention, FeatureCase::Proposed},
    {"none", FusionKind::None, FeatureCase::Proposed},
    {"case2", FusionKind::CrossAttention, FeatureCase::Case2},
    {"concat", FusionKind::Concat, FeatureCase::Proposed},
    {"swapped", FusionKind::Swapped, FeatureCase::Proposed},
};

struct CeRuns {
  Dataset data;
  // nmse[variant][repeat], masked NMSE at kKnownPercent
  std::map<std::string, std::vector<double>> nmse;
  std::map<std::string, double> train_seconds;
  std::optional<CEModel> proposed;  // repeat 1
  std::optional<CEModel> baseline;  // repeat 1
  double seconds = 0.0;
};

CeRuns run_ce(const std::set<std::string>& wanted) {
  CeRuns out;
  const auto t0 = Clock::now();
  out.data = generate_dataset(ce_data_config());
  const EvalConfig ev = ce_eval_config();
  for (std::size_t rep = 0; rep < kRepeats; ++rep) {
    for (const Variant& var : kVariants) {
      if (!wanted.contains(var.name)) continue;
      const auto t1 = Clock::now();
      CEResult r = train_ce(out.data, std::nullopt, ce_train_config(var.fusion, var.features, rep + 1));
      const double nmse = evaluate(r.model, out.data, ev, var.name, "ce").front().nmse_masked_db;
      const double secs = seconds_since(t1);
      out.nmse[var.name].push_back(nmse);
      out.train_seconds[var.name] += secs;
      std::printf("    repeat %zu %-9s masked NMSE %8.3f dB  (%.0f s)\n", rep + 1, var.name.c_str(), nmse, secs);
      std::fflush(stdout);
      if (rep == 0 && var.name == "proposed") out.proposed = std::move(r.model);
      if (rep == 0 && var.name == "none") out.baseline = std::move(r.model);
    }
  }
  out.seconds = seconds_since(t0);
  return out;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + fmt("%.3f", x);
  return s;
}

Verdict ce_multipath_gain(const CeRuns& runs) {
  Verdict v{5, "multipath gain and feature choice"};
  const auto& prop = runs.nmse.at("proposed");
  const auto& none = runs.nmse.at("none");
  const auto& case2 = runs.nmse.at("case2");
  bool every = true;
  for (std::size_t i = 0; i < prop.size(); ++i) every = every && prop[i] < none[i];
  const bool avg = mean_of(prop) <= mean_of(case2);
  note(v, "masked NMSE at " + fmt("%.0f", kKnownPercent) + "% known, dB per repeat");
  note(v, "  proposed [" + join(prop) + "] mean " + fmt("%.3f", mean_of(prop)));
  note(v, "  none     [" + join(none) + "] mean " + fmt("%.3f", mean_of(none)));
  note(v, "  case2    [" + join(case2) + "] mean " + fmt("%.3f", mean_of(case2)));
  note(v, std::string("proposed < none in every repeat: ") + (every ? "yes" : "no") +
              "; mean proposed <= mean case2: " + (avg ? "yes" : "no"));
  v.seconds = runs.train_seconds.at("proposed") + runs.train_seconds.at("none") + runs.train_seconds.at("case2");
  note(v, "runtime " + fmt("%.0f", v.seconds) + " s (target 3600 s)");
  v.pass = every && avg;
  return v;
}

Verdict ce_fusion(const CeRuns& runs) {
  Verdict v{6, "cross fusion versus concatenation"};
  const auto& cross = runs.nmse.at("proposed");
  const auto& swapped = runs.nmse.at("swapped");
  const auto& concat = runs.nmse.at("concat");
  bool c_ok = true, s_ok = true;
  for (std::size_t i = 0; i < concat.size(); ++i) {
    c_ok = c_ok && cross[i] < concat[i];
    s_ok = s_ok && swapped[i] < concat[i];
  }
  note(v, "  cross    [" + join(cross) + "]");
  note(v, "  swapped  [" + join(swapped) + "]");
  note(v, "  concat   [" + join(concat) + "]");
  note(v, std::string("cross < concat every repeat: ") + (c_ok ? "yes" : "no") +
              "; swapped < concat every repeat: " + (s_ok ? "yes" : "no"));
  v.seconds = runs.train_seconds.at("swapped") + runs.train_seconds.at("concat");
  v.pass = c_ok && s_ok;
  return v;
}

Verdict ce_transfer(const CeRuns& runs) {
  Verdict v{7, "3.5 GHz to 28 GHz transfer"};
  const auto t0 = Clock::now();
  const CEModel& model = *runs.proposed;
  EvalConfig ev = ce_eval_config();
  const double base = evaluate(model, runs.data, ev, "proposed", "3.5GHz").front().nmse_masked_db;

  GenerateConfig aligned = ce_data_config();
  aligned.carrier.center_frequency = CarrierConfig::preset("28GHz").center_frequency;
  GenerateConfig randomized = aligned;
  randomized.scenario.site_seed = 77;
  randomized.seed = 9001;
  ev.refit_norm = true;
  const double a = evaluate(model, generate_dataset(aligned), ev, "proposed", "28GHz-aligned").front().nmse_masked_db;
  const double r =
      evaluate(model, generate_dataset(randomized), ev, "proposed", "28GHz-random").front().nmse_masked_db;
  note(v, "masked NMSE at " + fmt("%.0f", kKnownPercent) + "% known: 3.5 GHz " + fmt("%.3f", base) +
              " dB, 28 GHz aligned " + fmt("%.3f", a) + " dB, 28 GHz randomized " + fmt("%.3f", r) + " dB");
  note(v, "degradation aligned " + fmt("%.3f", a - base) + " dB vs randomized " + fmt("%.3f", r - base) + " dB");
  v.seconds = seconds_since(t0);
  v.pass = a - base < r - base;
  return v;
}

Verdict ce_bench(const CeRuns& runs) {
  Verdict v{8, "latency table"};
  const auto t0 = Clock::now();
  const std::vector<std::pair<std::string, const CEModel*>> models{{"proposed", &*runs.proposed},
                                                                   {"none", &*runs.baseline}};
  const auto rows = bench(models, runs.data, {5, 10, 15, 20, 25}, 100, 10);
  bool finite = rows.size() == 10;
  std::istringstream table(bench_csv(rows));
  for (std::string line; std::getline(table, line);) note(v, line);
  for (const BenchRow& r : rows) finite = finite && std::isfinite(r.mean_ms) && std::isfinite(r.std_ms) && r.mean_ms > 0;
  v.seconds = seconds_since(t0);
  v.pass = finite;
  note(v, std::string("two variants x 5 percentages, all finite: ") + (finite ? "yes" : "no"));
  return v;
}

std::set<int> parse_only(const std::string& list) {
  std::set<int> out;
  std::stringstream ss(list);
  for (std::string tok; std::getline(ss, tok, ',');) out.insert(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only{1, 2, 3, 4, 5, 6, 7, 8};
  std::string report;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = parse_only(argv[++i]);
    } else if (a == "--report" && i + 1 < argc) {
      report = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--only 1,2,...] [--report path.csv]\n", argv[0]);
      return 2;
    }
  }

  std::vector<Verdict> verdicts;
  auto run = [&](int id, const std::function<Verdict()>& f) {
    if (!only.contains(id)) return;
    std::printf("[criterion %d]\n", id);
    std::fflush(stdout);
    verdicts.push_back(f());
    const Verdict& v = verdicts.back();
    std::printf("criterion %d %s %s (%.1f s)\n", v.id, v.pass ? "PASS" : "FAIL", v.name.c_str(), v.seconds);
    std::fflush(stdout);
  };

  try {
    run(1, gradient_suite);
    run(2, oracle_suite);
    run(3, masking_suite);
    run(4, c2p_training);

    std::set<std::string> wanted;
    if (only.contains(5)) wanted.insert({"proposed", "none", "case2"});
    if (only.contains(6)) wanted.insert({"proposed", "swapped", "concat"});
    if (only.contains(7)) wanted.insert("proposed");
    if (only.contains(8)) wanted.insert({"proposed", "none"});
    if (!wanted.empty()) {
      std::printf("[channel extrapolation runs: %zu repeats]\n", kRepeats);
      const CeRuns runs = run_ce(wanted);
      run(5, [&] { return ce_multipath_gain(runs); });
      run(6, [&] { return ce_fusion(runs); });
      run(7, [&] { return ce_transfer(runs); });
      run(8, [&] { return ce_bench(runs); });
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance harness error: %s\n", e.what());
    return 1;
  }

  std::printf("\nsummary\n");
  std::size_t passed = 0;
  for (const Verdict& v : verdicts) {
    std::printf("criterion %d %s %s\n", v.id, v.pass ? "PASS" : "FAIL", v.name.c_str());
    passed += v.pass ? 1 : 0;
  }
  std::printf("%zu of %zu criteria pass\n", passed, verdicts.size());

  if (!report.empty()) {
    std::ofstream f(report);
    f << "criterion,name,pass,seconds,detail\n";
    for (const Verdict& v : verdicts) {
      for (const std::string& d : v.details) {
        std::string q = d;
        for (std::size_t p = q.find('"'); p != std::string::npos; p = q.find('"', p + 2)) q.insert(p, "\"");
        f << v.id << ",\"" << v.name << "\"," << (v.pass ? 1 : 0) << ',' << fmt("%.3f", v.seconds) << ",\"" << q
          << "\"\n";
      }
    }
  }
  return 0;
}
