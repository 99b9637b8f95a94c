#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cext/config.hpp"
#include "cext/error.hpp"
#include "cext/evaluation.hpp"

namespace py = pybind11;
using namespace cext;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  return std::vector<double>(a.data(), a.data() + a.size());
}

KeyValues to_kv(const std::map<std::string, std::string>& settings) {
  KeyValues kv;
  for (const auto& [k, v] : settings) kv.set(k, v);
  return kv;
}

Dataset generate(const std::map<std::string, std::string>& settings, std::size_t n_samples, std::uint64_t seed,
                 bool with_paths) {
  const KeyValues kv = to_kv(settings);
  GenerateConfig g;
  read_into(kv, g.geometry);
  read_into(kv, g.carrier);
  read_into(kv, g.scenario);
  g.binning = PdpBinning::for_carrier(g.carrier, kv.get("pdp.n_bins", std::size_t{128}));
  read_into(kv, g.binning);
  g.n_samples = n_samples;
  g.seed = seed;
  g.with_paths = with_paths;
  return generate_dataset(g);
}

py::array_t<std::complex<double>> csi_array(const Dataset& ds, std::size_t i) {
  const ChannelMatrix& h = ds.samples.at(i).csi;
  py::array_t<std::complex<double>> out({h.n_rx, h.n_tx, h.n_sub});
  auto* p = out.mutable_data();
  for (std::size_t j = 0; j < h.re.size(); ++j) p[j] = {h.re[j], h.im[j]};
  return out;
}

Array pdp_array(const Dataset& ds, std::size_t i) {
  const PdpGrid& g = ds.samples.at(i).pdp;
  const std::size_t bins = g.profiles.empty() ? 0 : g.profiles[0].size();
  Array out({g.n_rx, g.n_tx, bins});
  auto* p = out.mutable_data();
  for (std::size_t k = 0; k < g.profiles.size(); ++k) {
    std::copy(g.profiles[k].bins.begin(), g.profiles[k].bins.end(), p + k * bins);
  }
  return out;
}

PowerDelayProfile as_pdp(const Array& bins, double bin_width) {
  PowerDelayProfile p;
  p.bins = to_vector(bins);
  p.bin_width = bin_width;
  return p;
}

py::dict plan_dict(const MaskPlan& p) {
  py::dict d;
  d["mask_ratio"] = p.mask_ratio;
  d["keep"] = p.keep;
  d["ids_shuffle"] = p.ids_shuffle;
  d["ids_keep"] = p.ids_keep;
  d["ids_restore"] = p.ids_restore;
  d["binary_mask"] = std::vector<int>(p.binary_mask.begin(), p.binary_mask.end());
  return d;
}

py::dict row_dict(const EvalRow& r) {
  py::dict d;
  d["variant"] = r.variant;
  d["dataset"] = r.dataset;
  d["known_percent"] = r.percent;
  d["mask_ratio"] = r.mask_ratio;
  d["n_samples"] = r.n_samples;
  d["n_slices"] = r.n_slices;
  d["nmse_masked_db"] = r.nmse_masked_db;
  d["nmse_full_db"] = r.nmse_full_db;
  d["masked_seed_std_db"] = r.masked_seed_std_db;
  return d;
}

}  // namespace

PYBIND11_MODULE(_cext, m) {
  m.doc() = "Multipath-assisted CSI extrapolation";

  // translators run newest first, so the base class goes in first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<EmptyProfileError>(m, "EmptyProfileError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<Dataset>(m, "Dataset")
      .def("__len__", &Dataset::size)
      .def_property_readonly("n_rx", [](const Dataset& d) { return d.geometry.n_rx; })
      .def_property_readonly("n_tx", [](const Dataset& d) { return d.geometry.n_tx; })
      .def_property_readonly("n_subcarriers", [](const Dataset& d) { return d.carrier.n_subcarriers; })
      .def_property_readonly("bin_width", [](const Dataset& d) { return d.binning.bin_width; })
      .def("csi", &csi_array, py::arg("index"), "Complex CSI [n_rx, n_tx, n_subcarriers] of one sample.")
      .def("pdp", &pdp_array, py::arg("index"), "Ground-truth PDPs [n_rx, n_tx, n_bins] of one sample.")
      .def("save", [](const Dataset& d, const std::string& path) { write_dataset(path, d); });

  m.def("generate", &generate, py::arg("settings") = std::map<std::string, std::string>{}, py::arg("n_samples"),
        py::arg("seed"), py::arg("with_paths") = false,
        "Synthetic dataset from key-value settings such as {'scenario.kind': 'street'}.");
  m.def("read_dataset", &read_dataset, py::arg("path"));

  m.def(
      "effective_paths",
      [](const Array& bins, double bin_width) {
        std::vector<std::pair<double, double>> out;
        for (const auto& e : effective_paths(as_pdp(bins, bin_width))) out.emplace_back(e.power, e.delay);
        return out;
      },
      py::arg("bins"), py::arg("bin_width"), "(power, delay) of bins above a third of the peak.");
  m.def(
      "extract_features",
      [](const Array& bins, double bin_width) {
        const auto s = extract_features(as_pdp(bins, bin_width));
        return std::make_pair(s.total_power, s.weighted_delay);
      },
      py::arg("bins"), py::arg("bin_width"));

  m.def(
      "mask_plan",
      [](const std::vector<double>& noise, double mask_ratio) { return plan_dict(mask_plan_from_noise(noise, mask_ratio)); },
      py::arg("noise"), py::arg("mask_ratio"));
  m.def(
      "nmse_db", [](const Array& est, const Array& ref) { return nmse_db(to_vector(est), to_vector(ref)); },
      py::arg("estimate"), py::arg("reference"));
  m.def(
      "lr_at",
      [](double epoch, double base_lr, double warmup, double min_lr, double total) {
        return lr_at(epoch, ScheduleConfig{base_lr, warmup, min_lr, total});
      },
      py::arg("epoch"), py::arg("base_lr") = 1e-3, py::arg("warmup_epochs") = 40.0, py::arg("min_lr") = 1e-6,
      py::arg("total_epochs") = 400.0);

  py::class_<CEModel>(m, "Model")
      .def_property_readonly("fusion", [](const CEModel& c) { return to_string(c.net.config().fusion); })
      .def_property_readonly("feature_case", [](const CEModel& c) { return to_string(c.feature_case); })
      .def(
          "evaluate",
          [](const CEModel& c, const Dataset& ds, const std::vector<double>& percentages, std::size_t mask_seeds,
             const std::string& split, std::uint64_t seed) {
            EvalConfig cfg;
            cfg.percentages = percentages;
            cfg.mask_seeds = mask_seeds;
            cfg.split = split;
            cfg.seed = seed;
            py::list out;
            for (const auto& r : evaluate(c, ds, cfg)) out.append(row_dict(r));
            return out;
          },
          py::arg("dataset"), py::arg("percentages") = std::vector<double>{5, 10, 15, 20, 25},
          py::arg("mask_seeds") = 3, py::arg("split") = "test", py::arg("seed") = 1234)
      .def("save", [](const CEModel& c, const std::string& path) { save_checkpoint(path, ce_checkpoint(c)); });

  m.def(
      "train_ce",
      [](const Dataset& ds, std::uint64_t seed, std::size_t epochs, const std::string& fusion,
         const std::string& feature_case, const std::map<std::string, std::string>& model_settings,
         double mask_ratio) {
        CETrainConfig cfg;
        read_into(to_kv(model_settings), cfg.model);
        cfg.model.fusion = parse_fusion_kind(fusion);
        cfg.feature_case = parse_feature_case(feature_case);
        cfg.gt_pdp = true;
        cfg.epochs = epochs;
        cfg.schedule.warmup_epochs = std::min<double>(cfg.schedule.warmup_epochs, epochs > 1 ? epochs - 1 : 0);
        cfg.mask_ratio = mask_ratio;
        cfg.seed = seed;
        py::gil_scoped_release release;
        CEResult r = train_ce(ds, std::nullopt, cfg);
        py::gil_scoped_acquire acquire;
        std::vector<std::pair<double, double>> hist;
        for (const auto& h : r.history) hist.emplace_back(h.train_loss, h.test_loss);
        return py::make_tuple(std::move(r.model), hist);
      },
      py::arg("dataset"), py::arg("seed"), py::arg("epochs"), py::arg("fusion") = "cross",
      py::arg("feature_case") = "proposed", py::arg("model") = std::map<std::string, std::string>{},
      py::arg("mask_ratio") = 0.75,
      "Trains an extrapolator on ground-truth PDP features; returns (model, [(train, test) loss per epoch]).");
  m.def(
      "load_model", [](const std::string& path) { return ce_from_checkpoint(load_checkpoint(path)); },
      py::arg("path"));
}
