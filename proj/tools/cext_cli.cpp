// cext: dataset generation, training, evaluation, ablation and timing.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cext/checkpoint.hpp"
#include "cext/config.hpp"
#include "cext/dataset.hpp"
#include "cext/error.hpp"
#include "cext/evaluation.hpp"
#include "cext/training.hpp"

using namespace cext;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "key = value settings file");
  app->add_option("--set", c.overrides, "override a setting, key=value (repeatable)");
}

// Desk defaults; the config file and --set overrides are layered on top.
KeyValues settings(const Common& c) {
  KeyValues kv;
  kv.set("carrier.n_subcarriers", "64");
  kv.set("scenario.kind", "street");
  if (!c.config_path.empty()) kv.merge(KeyValues::load(c.config_path));
  for (const auto& o : c.overrides) kv.set_assignment(o);
  return kv;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot open '" + out_path + "' for writing");
  out << text;
}

std::vector<double> parse_percentages(const std::string& s) {
  KeyValues kv;
  kv.set("p", s);
  return kv.get_list("p", {});
}

std::pair<std::string, std::string> labelled(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos) return {arg, arg};
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Environment-assisted MIMO channel extrapolation"};
  app.require_subcommand(1);

  // generate
  Common gen_c;
  std::string gen_out, gen_preset;
  std::uint64_t gen_seed = 0;
  std::size_t gen_n = 0;
  bool gen_paths = false;
  auto* gen = app.add_subcommand("generate", "synthesize a dataset file");
  add_common(gen, gen_c);
  gen->add_option("out", gen_out, "output dataset path")->required();
  gen->add_option("--seed", gen_seed, "generator seed")->required();
  gen->add_option("--n-samples", gen_n, "number of channel samples (default 2000)");
  gen->add_option("--preset", gen_preset, "carrier preset: 3.5GHz, 5.9GHz, 28GHz");
  gen->add_flag("--with-paths", gen_paths, "store the path sets as well");

  // train-c2p
  Common c2p_c;
  std::string c2p_data, c2p_out, c2p_hist;
  std::uint64_t c2p_seed = 0;
  bool c2p_verbose = false;
  auto* tc2p = app.add_subcommand("train-c2p", "train the CSI-to-PDP auto-encoder");
  add_common(tc2p, c2p_c);
  tc2p->add_option("dataset", c2p_data)->required()->check(CLI::ExistingFile);
  tc2p->add_option("out", c2p_out, "output checkpoint")->required();
  tc2p->add_option("--seed", c2p_seed)->required();
  tc2p->add_option("--history", c2p_hist, "per-epoch loss CSV");
  tc2p->add_flag("--verbose", c2p_verbose);

  // train-ce
  Common ce_c;
  std::string ce_data, ce_out, ce_hist, ce_c2p, ce_case = "proposed", ce_fusion = "cross";
  std::uint64_t ce_seed = 0;
  bool ce_gt = false, ce_verbose = false;
  auto* tce = app.add_subcommand("train-ce", "train the channel extrapolator");
  add_common(tce, ce_c);
  tce->add_option("dataset", ce_data)->required()->check(CLI::ExistingFile);
  tce->add_option("out", ce_out, "output checkpoint")->required();
  tce->add_option("--seed", ce_seed)->required();
  auto* c2p_opt = tce->add_option("--c2p", ce_c2p, "trained CSI-to-PDP checkpoint")->check(CLI::ExistingFile);
  tce->add_flag("--gt-pdp", ce_gt, "use ground-truth PDPs instead of inferred ones")->excludes(c2p_opt);
  tce->add_option("--feature-case", ce_case, "proposed, case1..case4, average");
  tce->add_option("--fusion", ce_fusion, "cross, swapped, concat, none");
  tce->add_option("--history", ce_hist, "per-epoch loss CSV");
  tce->add_flag("--verbose", ce_verbose);

  // eval
  Common ev_c;
  std::string ev_ckpt, ev_data, ev_out, ev_pcts = "5,10,15,20,25", ev_split = "test";
  std::size_t ev_seeds = 3, ev_slices = 0;
  bool ev_refit = false;
  auto* ev = app.add_subcommand("eval", "NMSE per known-CSI percentage");
  add_common(ev, ev_c);
  ev->add_option("checkpoint", ev_ckpt)->required()->check(CLI::ExistingFile);
  ev->add_option("dataset", ev_data)->required()->check(CLI::ExistingFile);
  ev->add_option("--percentages", ev_pcts);
  ev->add_option("--mask-seeds", ev_seeds);
  ev->add_option("--slices", ev_slices, "subcarriers per sample, 0 = all");
  ev->add_option("--split", ev_split, "test or all");
  ev->add_flag("--refit-norm", ev_refit, "re-estimate normalisation on the evaluation inputs");
  ev->add_option("--out", ev_out, "CSV path (default stdout)");

  // ablate
  Common ab_c;
  std::vector<std::string> ab_data, ab_models;
  std::string ab_axis = "fusion_variant", ab_out, ab_pcts = "5,10,15,20,25", ab_split = "test";
  std::size_t ab_seeds = 3, ab_slices = 0;
  bool ab_refit = false;
  auto* ab = app.add_subcommand("ablate", "evaluate a set of variants side by side");
  add_common(ab, ab_c);
  ab->add_option("datasets", ab_data, "dataset paths, optionally label=path")->required();
  ab->add_option("--model", ab_models, "label=checkpoint (repeatable)")->required();
  ab->add_option("--axis", ab_axis)
      ->check(CLI::IsMember({"feature_case", "fusion_variant", "average_vs_antennawise", "frequency_preset"}));
  ab->add_option("--percentages", ab_pcts);
  ab->add_option("--mask-seeds", ab_seeds);
  ab->add_option("--slices", ab_slices);
  ab->add_option("--split", ab_split);
  ab->add_flag("--refit-norm", ab_refit);
  ab->add_option("--out", ab_out);

  // bench
  Common bn_c;
  std::string bn_ckpt, bn_base, bn_data, bn_out, bn_pcts = "5,10,15,20,25";
  std::size_t bn_runs = 200, bn_warmup = 20;
  auto* bn = app.add_subcommand("bench", "single-sample inference latency, proposed vs baseline");
  add_common(bn, bn_c);
  bn->add_option("checkpoint", bn_ckpt)->required()->check(CLI::ExistingFile);
  bn->add_option("baseline", bn_base)->required()->check(CLI::ExistingFile);
  bn->add_option("dataset", bn_data)->required()->check(CLI::ExistingFile);
  bn->add_option("--percentages", bn_pcts);
  bn->add_option("--runs", bn_runs)->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
  bn->add_option("--warmup", bn_warmup);
  bn->add_option("--out", bn_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      KeyValues kv = settings(gen_c);
      if (!gen_preset.empty()) kv.set("carrier.preset", gen_preset);
      GenerateConfig g;
      read_into(kv, g.geometry);
      read_into(kv, g.carrier);
      read_into(kv, g.scenario);
      g.binning = PdpBinning::for_carrier(g.carrier, kv.get("pdp.n_bins", std::size_t{128}));
      read_into(kv, g.binning);
      g.n_samples = gen_n ? gen_n : kv.get("generate.n_samples", std::size_t{2000});
      g.seed = gen_seed;
      g.with_paths = gen_paths;
      const Dataset ds = generate_dataset(g);
      write_dataset(gen_out, ds);
      std::fprintf(stderr, "wrote %zu samples (%zux%zu antennas, %zu subcarriers) to %s\n", ds.size(),
                   ds.geometry.n_rx, ds.geometry.n_tx, ds.carrier.n_subcarriers, gen_out.c_str());
    } else if (tc2p->parsed()) {
      const KeyValues kv = settings(c2p_c);
      C2PTrainConfig cfg;
      cfg.epochs = kv.get("c2p.epochs", cfg.epochs);
      cfg.batch = kv.get("c2p.batch", cfg.batch);
      cfg.hidden = kv.get("c2p.hidden", cfg.hidden);
      cfg.lr = kv.get("c2p.lr", cfg.lr);
      cfg.pdp_ref = kv.get("c2p.pdp_ref", cfg.pdp_ref);
      cfg.per_sample = kv.get("c2p.per_sample", cfg.per_sample);
      cfg.measured_weight = kv.get("c2p.measured_weight", cfg.measured_weight);
      cfg.weight_decay = kv.get("c2p.weight_decay", cfg.weight_decay);
      cfg.train_fraction = kv.get("train.fraction", cfg.train_fraction);
      cfg.seed = c2p_seed;
      cfg.verbose = c2p_verbose;
      const Dataset ds = read_dataset(c2p_data);
      const C2PResult r = train_c2p(ds, cfg);
      save_checkpoint(c2p_out, c2p_checkpoint(r.model));
      if (!c2p_hist.empty()) write_history_csv(c2p_hist, r.history);
      std::fprintf(stderr, "final train loss %.6g, test loss %.6g\n", r.history.back().train_loss,
                   r.history.back().test_loss);
    } else if (tce->parsed()) {
      const KeyValues kv = settings(ce_c);
      CETrainConfig cfg;
      read_into(kv, cfg.model);
      cfg.model.fusion = parse_fusion_kind(kv.get("model.fusion", ce_fusion));
      cfg.feature_case = parse_feature_case(kv.get("ce.feature_case", ce_case));
      cfg.gt_pdp = ce_gt;
      cfg.epochs = kv.get("ce.epochs", cfg.epochs);
      cfg.batch = kv.get("ce.batch", cfg.batch);
      cfg.schedule.base_lr = kv.get("ce.lr", cfg.schedule.base_lr);
      cfg.schedule.warmup_epochs = kv.get("ce.warmup_epochs", cfg.schedule.warmup_epochs);
      cfg.schedule.min_lr = kv.get("ce.min_lr", cfg.schedule.min_lr);
      cfg.step_schedule = kv.get("ce.step_schedule", cfg.step_schedule);
      cfg.weight_decay = kv.get("ce.weight_decay", cfg.weight_decay);
      cfg.mask_ratio = kv.get("ce.mask_ratio", cfg.mask_ratio);
      cfg.slices_per_sample = kv.get("ce.slices_per_sample", cfg.slices_per_sample);
      cfg.test_slices = kv.get("ce.test_slices", cfg.test_slices);
      cfg.train_fraction = kv.get("train.fraction", cfg.train_fraction);
      cfg.seed = ce_seed;
      cfg.verbose = ce_verbose;
      std::optional<C2PModel> c2p;
      if (!ce_c2p.empty()) c2p = c2p_from_checkpoint(load_checkpoint(ce_c2p));
      const Dataset ds = read_dataset(ce_data);
      const CEResult r = train_ce(ds, std::move(c2p), cfg);
      save_checkpoint(ce_out, ce_checkpoint(r.model));
      if (!ce_hist.empty()) write_history_csv(ce_hist, r.history);
      std::fprintf(stderr, "final train loss %.6g, test loss %.6g\n", r.history.back().train_loss,
                   r.history.back().test_loss);
    } else if (ev->parsed()) {
      const KeyValues kv = settings(ev_c);
      const Checkpoint ckpt = load_checkpoint(ev_ckpt);
      const Dataset ds = read_dataset(ev_data);
      const double fraction = kv.get("train.fraction", 0.9);
      if (ckpt.kind == "c2p") {
        const C2PModel model = c2p_from_checkpoint(ckpt);
        const Split split = split_indices(ds.size(), fraction);
        const C2PData data = c2p_pairs(ds, ev_split == "all" ? split_indices(ds.size(), 1.0).train : split.test,
                                       kv.get_u64("eval.pair_seed", 0));
        char buf[320];
        std::snprintf(buf, sizeof buf,
                      "metric,value\nloss,%.10g\npdp_nmse_db,%.6f\ninfer_nmse_db,%.6f\nlatent_nmse,%.6g\n"
                      "power_within_20pct,%.6f\n",
                      c2p_eval_loss(model, data), c2p_pdp_nmse_db(model, data), c2p_infer_nmse_db(model, data),
                      c2p_latent_nmse(model, data), c2p_power_within(model, data, 0.2));
        emit(ev_out, buf);
      } else {
        const CEModel model = ce_from_checkpoint(ckpt);
        EvalConfig cfg;
        cfg.percentages = parse_percentages(ev_pcts);
        cfg.mask_seeds = ev_seeds;
        cfg.slices = ev_slices;
        cfg.split = ev_split;
        cfg.refit_norm = ev_refit;
        cfg.train_fraction = fraction;
        cfg.seed = kv.get_u64("eval.seed", cfg.seed);
        const auto rows = evaluate(model, ds, cfg, to_string(model.net.config().fusion), ev_data);
        emit(ev_out, eval_csv(rows));
        std::cerr << eval_table(rows);
      }
    } else if (ab->parsed()) {
      const KeyValues kv = settings(ab_c);
      std::vector<std::pair<std::string, CEModel>> models;
      for (const auto& m : ab_models) {
        const auto [label, path] = labelled(m);
        models.emplace_back(label, ce_from_checkpoint(load_checkpoint(path)));
      }
      std::vector<std::pair<std::string, Dataset>> datasets;
      for (const auto& d : ab_data) {
        const auto [label, path] = labelled(d);
        datasets.emplace_back(label, read_dataset(path));
      }
      std::vector<std::pair<std::string, const CEModel*>> mp;
      for (const auto& [l, m] : models) mp.emplace_back(l, &m);
      std::vector<std::pair<std::string, const Dataset*>> dp;
      for (const auto& [l, d] : datasets) dp.emplace_back(l, &d);
      EvalConfig cfg;
      cfg.percentages = parse_percentages(ab_pcts);
      cfg.mask_seeds = ab_seeds;
      cfg.slices = ab_slices;
      cfg.split = ab_split;
      cfg.refit_norm = ab_refit;
      cfg.train_fraction = kv.get("train.fraction", 0.9);
      cfg.seed = kv.get_u64("eval.seed", cfg.seed);
      const auto rows = ablate(mp, dp, cfg);
      emit(ab_out, eval_csv(rows, ab_axis));
      std::cerr << eval_table(rows);
    } else if (bn->parsed()) {
      settings(bn_c);
      const CEModel proposed = ce_from_checkpoint(load_checkpoint(bn_ckpt));
      const CEModel baseline = ce_from_checkpoint(load_checkpoint(bn_base));
      const Dataset ds = read_dataset(bn_data);
      const auto rows = bench({{"proposed", &proposed}, {"baseline", &baseline}}, ds,
                              parse_percentages(bn_pcts), bn_runs, bn_warmup);
      emit(bn_out, bench_csv(rows));
      std::cerr << "latencies are hardware dependent\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
