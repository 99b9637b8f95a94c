#include "cext/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binary_io.hpp"
#include "cext/error.hpp"

namespace cext {
namespace {

constexpr char kMagic[8] = {'C', 'E', 'X', 'T', 'D', 'S', 'E', 'T'};

void write_path(detail::ByteWriter& w, const Path& p) {
  for (double v : {p.amplitude, p.phase, p.delay, p.aoa_az, p.aoa_el, p.aod_az, p.aod_el}) w.f64(v);
}

Path read_path(detail::ByteReader& r) {
  Path p;
  for (double* v : {&p.amplitude, &p.phase, &p.delay, &p.aoa_az, &p.aoa_el, &p.aod_az, &p.aod_el}) {
    *v = r.f64();
  }
  return p;
}

}  // namespace

std::string serialize_dataset(const Dataset& ds) {
  detail::ByteWriter w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kDatasetVersion);
  w.u32(ds.flags);
  KeyValues header;
  write_from(header, ds.geometry);
  write_from(header, ds.carrier);
  write_from(header, ds.binning);
  w.str(header.to_text());
  w.str(ds.metadata.to_text());
  w.u64(ds.samples.size());
  w.checksum_since(0);

  const std::size_t payload = w.size();
  const std::size_t pairs = ds.geometry.pairs();
  const std::size_t cells = pairs * ds.carrier.n_subcarriers;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const DatasetSample& s = ds.samples[i];
    if (ds.has(kHasCsi)) {
      if (s.csi.re.size() != cells || s.csi.im.size() != cells) {
        throw DimensionError("sample " + std::to_string(i) + ": CSI size does not match the header");
      }
      w.f64s(s.csi.re);
      w.f64s(s.csi.im);
    }
    if (ds.has(kHasPdp)) {
      if (s.pdp.profiles.size() != pairs) {
        throw DimensionError("sample " + std::to_string(i) + ": PDP count does not match the header");
      }
      for (const auto& p : s.pdp.profiles) {
        if (p.bins.size() != ds.binning.n_bins) {
          throw DimensionError("sample " + std::to_string(i) + ": PDP length does not match the header");
        }
        w.f64s(p.bins);
      }
    }
    if (ds.has(kHasPaths)) {
      w.u64(s.paths.paths.size());
      for (const auto& p : s.paths.paths) write_path(w, p);
      w.u32(s.paths.has_jitter() ? 1u : 0u);
      if (s.paths.has_jitter()) {
        w.f64s(s.paths.jitter_log_amp);
        w.f64s(s.paths.jitter_phase);
        w.f64s(s.paths.jitter_delay);
      }
    }
  }
  w.checksum_since(payload);
  return w.buffer();
}

Dataset deserialize_dataset(const std::string& bytes, const std::string& origin) {
  detail::ByteReader r(bytes, origin);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (!std::equal(magic, magic + 8, kMagic)) r.fail("not a dataset file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kDatasetVersion) r.fail("unsupported dataset version " + std::to_string(version));
  Dataset ds;
  ds.flags = r.u32();
  const KeyValues header = KeyValues::parse(r.str(), origin + " header");
  ds.metadata = KeyValues::parse(r.str(), origin + " metadata");
  const std::uint64_t n = r.u64();
  r.verify_checksum_since(0, "header");
  read_into(header, ds.geometry);
  read_into(header, ds.carrier);
  read_into(header, ds.binning);

  const std::size_t payload = r.pos();
  const std::size_t pairs = ds.geometry.pairs();
  const std::size_t nsub = ds.carrier.n_subcarriers;
  std::size_t per_sample = 0;
  if (ds.has(kHasCsi)) per_sample += 2 * pairs * nsub * sizeof(double);
  if (ds.has(kHasPdp)) per_sample += pairs * ds.binning.n_bins * sizeof(double);
  if (per_sample > 0 && n > r.remaining() / per_sample) r.fail("declared sample count exceeds payload");
  ds.samples.resize(n);
  for (auto& s : ds.samples) {
    if (ds.has(kHasCsi)) {
      s.csi = ChannelMatrix(ds.geometry.n_rx, ds.geometry.n_tx, nsub);
      r.f64s(s.csi.re);
      r.f64s(s.csi.im);
    }
    if (ds.has(kHasPdp)) {
      s.pdp = PdpGrid{ds.geometry.n_rx, ds.geometry.n_tx, {}};
      s.pdp.profiles.resize(pairs);
      for (auto& p : s.pdp.profiles) {
        p.bin_width = ds.binning.bin_width;
        p.bins.resize(ds.binning.n_bins);
        r.f64s(p.bins);
      }
    }
    if (ds.has(kHasPaths)) {
      const std::uint64_t np = r.u64();
      if (np > r.remaining() / (7 * sizeof(double))) r.fail("path count exceeds payload");
      s.paths.n_rx = ds.geometry.n_rx;
      s.paths.n_tx = ds.geometry.n_tx;
      for (std::uint64_t l = 0; l < np; ++l) s.paths.paths.push_back(read_path(r));
      if (r.u32() != 0) {
        const std::size_t nj = pairs * np;
        if (nj > r.remaining() / (3 * sizeof(double))) r.fail("jitter block exceeds payload");
        for (auto* v : {&s.paths.jitter_log_amp, &s.paths.jitter_phase, &s.paths.jitter_delay}) {
          v->resize(nj);
          r.f64s(*v);
        }
      }
    }
  }
  r.verify_checksum_since(payload, "payload");
  if (r.remaining() != 0) r.fail("trailing bytes after payload");
  return ds;
}

void write_dataset(const std::string& path, const Dataset& ds) {
  detail::write_file(path, serialize_dataset(ds));
}

Dataset read_dataset(const std::string& path) {
  return deserialize_dataset(detail::read_file(path), path);
}

DatasetSample generate_sample(const GenerateConfig& cfg, std::size_t index) {
  Rng rng(derive_seed(cfg.seed, {index}));
  DatasetSample s;
  s.paths = sample_paths(cfg.scenario, cfg.geometry, cfg.carrier, rng);
  s.csi = synthesize_csi(s.paths, cfg.geometry, cfg.carrier);
  s.pdp = ground_truth_pdp(s.paths, cfg.binning);
  if (!cfg.with_paths) s.paths = PathSet{};
  return s;
}

Dataset generate_dataset(const GenerateConfig& cfg) {
  cfg.scenario.validate();
  cfg.geometry.validate();
  cfg.carrier.validate();
  cfg.binning.validate();
  Dataset ds;
  ds.geometry = cfg.geometry;
  ds.carrier = cfg.carrier;
  ds.binning = cfg.binning;
  ds.flags = kHasCsi | kHasPdp | (cfg.with_paths ? kHasPaths : 0u);
  write_from(ds.metadata, cfg.scenario);
  ds.metadata.set("generate.seed", std::to_string(cfg.seed));
  ds.metadata.set("generate.n_samples", std::to_string(cfg.n_samples));
  ds.samples.reserve(cfg.n_samples);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) ds.samples.push_back(generate_sample(cfg, i));
  return ds;
}

Split split_indices(std::size_t n, double train_fraction) {
  if (!(train_fraction > 0 && train_fraction <= 1)) {
    throw ConfigError("train fraction must lie in (0, 1]");
  }
  auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction + 1e-9));
  if (n >= 2) n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  Split s;
  s.train.resize(std::min(n_train, n));
  std::iota(s.train.begin(), s.train.end(), std::size_t{0});
  for (std::size_t i = s.train.size(); i < n; ++i) s.test.push_back(i);
  return s;
}

}  // namespace cext
