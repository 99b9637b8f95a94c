#include "cext/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "cext/error.hpp"

namespace cext {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

struct Vec3 {
  double x, y, z;
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }

double azimuth(const Vec3& v) { return std::atan2(v.y, v.x); }
double elevation(const Vec3& v) { return std::atan2(v.z, std::hypot(v.x, v.y)); }

double frequency_factor(const ScenarioConfig& s, const CarrierConfig& c) {
  return std::pow(s.reference_frequency / c.center_frequency,
                  1.0 + s.extra_attenuation_exponent);
}

std::vector<Path> statistical_paths(const ScenarioConfig& s, const CarrierConfig& c, Rng& rng) {
  const double first = uniform(rng, s.min_first_delay, s.max_first_delay);
  const double gain_db = uniform(rng, s.gain_db_min, s.gain_db_max);
  const double max_excess = std::max(0.0, s.max_delay - first);
  const double ffac = frequency_factor(s, c);
  std::exponential_distribution<double> excess_dist(1.0 / s.delay_spread);

  std::vector<Path> paths(s.n_paths);
  for (std::size_t l = 0; l < s.n_paths; ++l) {
    Path& p = paths[l];
    double excess = 0.0;
    if (l > 0) {
      // Truncated exponential: resample past the delay window.
      do {
        excess = excess_dist(rng);
      } while (excess >= max_excess);
    }
    p.delay = first + excess;
    const double shadow_db = s.path_power_std_db > 0 ? normal(rng, 0.0, s.path_power_std_db) : 0.0;
    const double power = std::pow(10.0, (gain_db + shadow_db) / 10.0) *
                         std::exp(-s.decay_exponent * excess / s.delay_spread);
    p.amplitude = std::sqrt(power) * ffac;
    const double phi0 = uniform(rng, 0.0, kTwoPi);
    p.phase = wrap_phase(phi0 - kTwoPi * c.center_frequency * p.delay);
    p.aod_az = uniform(rng, s.aod_az_min, s.aod_az_max);
    p.aod_el = uniform(rng, s.aod_el_min, s.aod_el_max);
    p.aoa_az = uniform(rng, s.aoa_az_min, s.aoa_az_max);
    p.aoa_el = uniform(rng, s.aoa_el_min, s.aoa_el_max);
  }
  return paths;
}

// Image-method street canyon. Walls at y = +-W/2, ground at z = 0, BS array
// broadside along +x, UE array broadside facing the BS (-x).
std::vector<Path> street_paths(const ScenarioConfig& s, const CarrierConfig& c, Rng& rng) {
  const double half = s.street_width / 2.0;
  const Vec3 bs{0.0, s.bs_y, s.bs_height};
  const Vec3 ue{uniform(rng, s.ue_x_min, s.ue_x_max),
                uniform(rng, -half + s.ue_margin, half - s.ue_margin), s.ue_height};
  const double lambda = c.wavelength();
  const double ffac = std::pow(s.reference_frequency / c.center_frequency,
                               s.extra_attenuation_exponent);

  std::vector<Path> out;
  auto emit = [&](double length, const Vec3& depart, const Vec3& arrive_from, double gain,
                  int bounces) {
    Path p;
    p.delay = length / kSpeedOfLight;
    p.amplitude = gain * lambda / (4.0 * std::numbers::pi * length) * std::pow(ffac, bounces);
    p.phase = wrap_phase(-kTwoPi * length / lambda + std::numbers::pi * bounces);
    p.aod_az = azimuth(depart);
    p.aod_el = elevation(depart);
    // UE frame is rotated by pi about z.
    p.aoa_az = azimuth({-arrive_from.x, -arrive_from.y, arrive_from.z});
    p.aoa_el = elevation(arrive_from);
    out.push_back(p);
  };

  // Mirror images of the UE: wall bounce sequences up to order two, each
  // with and without a ground bounce.
  struct Image {
    double y;
    int walls;
  };
  const std::array<Image, 5> images{{{ue.y, 0},
                                     {s.street_width - ue.y, 1},
                                     {-s.street_width - ue.y, 1},
                                     {2.0 * s.street_width + ue.y, 2},
                                     {-2.0 * s.street_width + ue.y, 2}}};
  for (const Image& im : images) {
    for (int ground = 0; ground < 2; ++ground) {
      const Vec3 img{ue.x, im.y, ground ? -ue.z : ue.z};
      const Vec3 d = img - bs;
      const double length = d.norm();
      // Arrival direction: departure direction mirrored once per bounce,
      // reversed to point back toward the source.
      Vec3 prop = d;
      if (im.walls % 2) prop.y = -prop.y;
      if (ground) prop.z = -prop.z;
      const Vec3 toward_source{-prop.x, -prop.y, -prop.z};
      const double gain = std::pow(s.wall_reflection, im.walls) *
                          (ground ? s.ground_reflection : 1.0);
      emit(length, d, toward_source, gain, im.walls + ground);
    }
  }

  // Fixed point scatterers belong to the site, not to the sample.
  Rng site(derive_seed(s.site_seed, {0x5c47}));
  for (std::size_t i = 0; i < s.n_scatterers; ++i) {
    const Vec3 sc{uniform(site, 0.0, s.ue_x_max * 1.1), uniform(site, -half, half),
                  uniform(site, 1.0, 8.0)};
    const Vec3 d1 = sc - bs;
    const Vec3 d2 = ue - sc;
    const double length = d1.norm() + d2.norm();
    const Vec3 toward_source{-d2.x, -d2.y, -d2.z};
    // Bistatic point scatterer: amplitude ~ 1/(d1 d2), referenced to 1 m.
    const double gain = s.scatterer_gain * length / (d1.norm() * d2.norm());
    emit(length, d1, toward_source, gain, 1);
  }

  out.erase(std::remove_if(out.begin(), out.end(),
                           [&](const Path& p) { return p.delay >= s.max_delay; }),
            out.end());
  return out;
}

}  // namespace

void ArrayGeometry::validate() const {
  if (n_tx < 1 || n_rx < 1) throw ConfigError("array needs at least one tx and one rx element");
  if (!(element_spacing > 0)) throw ConfigError("element spacing must be positive");
  if (layout == ArrayLayout::Planar && planar_width == 0) {
    throw ConfigError("planar array needs planar_width >= 1");
  }
}

std::vector<Path> PathSet::pair_paths(std::size_t m, std::size_t k) const {
  std::vector<Path> out = paths;
  if (!has_jitter()) return out;
  const std::size_t base = (m * n_tx + k) * paths.size();
  for (std::size_t l = 0; l < out.size(); ++l) {
    out[l].amplitude *= std::exp(jitter_log_amp[base + l]);
    out[l].phase = wrap_phase(out[l].phase + jitter_phase[base + l]);
    out[l].delay = std::max(0.0, out[l].delay + jitter_delay[base + l]);
  }
  return out;
}

double CarrierConfig::subcarrier_frequency(std::size_t n) const {
  return (static_cast<double>(n) - (static_cast<double>(n_subcarriers) - 1.0) / 2.0) *
         subcarrier_spacing;
}

void CarrierConfig::validate() const {
  if (n_subcarriers < 1) throw ConfigError("need at least one subcarrier");
  if (!(subcarrier_spacing > 0)) throw ConfigError("subcarrier spacing must be positive");
  if (!(center_frequency > 0)) throw ConfigError("center frequency must be positive");
  if (!(bandwidth > 0)) throw ConfigError("bandwidth must be positive");
}

CarrierConfig CarrierConfig::preset(const std::string& name) {
  CarrierConfig c;
  if (name == "3.5GHz") {
    c.center_frequency = 3.5e9;
  } else if (name == "5.9GHz") {
    c.center_frequency = 5.9e9;
  } else if (name == "28GHz") {
    c.center_frequency = 28e9;
  } else {
    throw ConfigError("unknown carrier preset '" + name + "' (3.5GHz, 5.9GHz, 28GHz)");
  }
  return c;
}

void ScenarioConfig::validate() const {
  if (n_paths == 0) throw ConfigError("scenario needs at least one path");
  if (delay_grid < 0) throw ConfigError("delay_grid must be non-negative");
  if (!(max_delay > 0)) throw ConfigError("max_delay must be positive");
  if (kind == ScenarioKind::Statistical) {
    if (!(delay_spread > 0)) throw ConfigError("delay_spread must be positive");
    if (min_first_delay < 0 || max_first_delay < min_first_delay || max_first_delay >= max_delay) {
      throw ConfigError("first-arrival delay range must lie inside [0, max_delay)");
    }
  } else {
    if (!(street_width > 2 * ue_margin)) throw ConfigError("street narrower than UE margins");
    if (!(ue_x_max > ue_x_min) || ue_x_min <= 0) throw ConfigError("bad UE x range");
  }
  if (jitter_log_amp < 0 || jitter_phase < 0 || jitter_delay < 0) {
    throw ConfigError("jitter magnitudes must be non-negative");
  }
}

ScenarioKind parse_scenario_kind(const std::string& name) {
  if (name == "statistical") return ScenarioKind::Statistical;
  if (name == "street") return ScenarioKind::Street;
  throw ConfigError("unknown scenario kind '" + name + "'");
}

std::string to_string(ScenarioKind kind) {
  return kind == ScenarioKind::Street ? "street" : "statistical";
}

PathSet sample_paths(const ScenarioConfig& scenario, const ArrayGeometry& geometry,
                     const CarrierConfig& carrier, Rng& rng) {
  scenario.validate();
  geometry.validate();
  carrier.validate();
  PathSet ps;
  ps.n_rx = geometry.n_rx;
  ps.n_tx = geometry.n_tx;
  ps.paths = scenario.kind == ScenarioKind::Street ? street_paths(scenario, carrier, rng)
                                                    : statistical_paths(scenario, carrier, rng);
  for (Path& p : ps.paths) {
    if (scenario.coherent_phase) p.phase = 0.0;
    if (scenario.delay_grid > 0) p.delay = std::floor(p.delay / scenario.delay_grid) * scenario.delay_grid;
  }
  std::stable_sort(ps.paths.begin(), ps.paths.end(),
                   [](const Path& a, const Path& b) { return a.amplitude > b.amplitude; });
  if (ps.paths.size() > scenario.n_paths) ps.paths.resize(scenario.n_paths);
  if (ps.paths.empty()) throw ConfigError("scenario produced no paths inside max_delay");

  const bool jitter = scenario.jitter_log_amp > 0 || scenario.jitter_phase > 0 ||
                      scenario.jitter_delay > 0;
  if (jitter) {
    const std::size_t n = geometry.pairs() * ps.paths.size();
    ps.jitter_log_amp.resize(n);
    ps.jitter_phase.resize(n);
    ps.jitter_delay.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      ps.jitter_log_amp[i] = normal(rng, 0.0, 1.0) * scenario.jitter_log_amp;
      ps.jitter_phase[i] = normal(rng, 0.0, 1.0) * scenario.jitter_phase;
      // Keep jittered delays inside [0, max_delay).
      const double d = ps.paths[i % ps.paths.size()].delay;
      const double j = normal(rng, 0.0, 1.0) * scenario.jitter_delay;
      ps.jitter_delay[i] = std::clamp(d + j, 0.0, std::nextafter(scenario.max_delay, 0.0)) - d;
    }
  }
  return ps;
}

std::vector<cdouble> array_response(const ArrayGeometry& geometry, double az, double el,
                                    ArraySide side) {
  const std::size_t n = side == ArraySide::Tx ? geometry.n_tx : geometry.n_rx;
  std::vector<cdouble> a(n);
  const double s = geometry.element_spacing;
  for (std::size_t i = 0; i < n; ++i) {
    double phase;
    if (geometry.layout == ArrayLayout::Linear) {
      phase = kTwoPi * s * static_cast<double>(i) * std::sin(az) * std::cos(el);
    } else {
      const double col = static_cast<double>(i % geometry.planar_width);
      const double row = static_cast<double>(i / geometry.planar_width);
      phase = kTwoPi * s * (col * std::sin(az) * std::cos(el) + row * std::sin(el));
    }
    a[i] = std::polar(1.0, phase);
  }
  return a;
}

std::vector<double> ChannelMatrix::pair_vector(std::size_t m, std::size_t k) const {
  std::vector<double> v(2 * n_sub);
  const std::size_t base = index(m, k, 0);
  std::copy_n(re.begin() + static_cast<std::ptrdiff_t>(base), n_sub, v.begin());
  std::copy_n(im.begin() + static_cast<std::ptrdiff_t>(base), n_sub,
              v.begin() + static_cast<std::ptrdiff_t>(n_sub));
  return v;
}

ChannelMatrix synthesize_csi(const PathSet& ps, const ArrayGeometry& geometry,
                             const CarrierConfig& carrier) {
  geometry.validate();
  carrier.validate();
  if (ps.n_rx != geometry.n_rx || ps.n_tx != geometry.n_tx) {
    throw DimensionError("path set was drawn for a different array size");
  }
  const std::size_t n_paths = ps.paths.size();
  std::vector<std::vector<cdouble>> ar(n_paths), at(n_paths);
  for (std::size_t l = 0; l < n_paths; ++l) {
    ar[l] = array_response(geometry, ps.paths[l].aoa_az, ps.paths[l].aoa_el, ArraySide::Rx);
    at[l] = array_response(geometry, ps.paths[l].aod_az, ps.paths[l].aod_el, ArraySide::Tx);
  }
  std::vector<double> freq(carrier.n_subcarriers);
  for (std::size_t n = 0; n < freq.size(); ++n) freq[n] = carrier.subcarrier_frequency(n);

  ChannelMatrix h(geometry.n_rx, geometry.n_tx, carrier.n_subcarriers);
  for (std::size_t m = 0; m < geometry.n_rx; ++m) {
    for (std::size_t k = 0; k < geometry.n_tx; ++k) {
      const std::vector<Path> paths = ps.pair_paths(m, k);
      const std::size_t base = h.index(m, k, 0);
      for (std::size_t l = 0; l < n_paths; ++l) {
        const Path& p = paths[l];
        const cdouble c = std::polar(p.amplitude, p.phase) * ar[l][m] * std::conj(at[l][k]);
        for (std::size_t n = 0; n < freq.size(); ++n) {
          const cdouble v = c * std::polar(1.0, -kTwoPi * freq[n] * p.delay);
          h.re[base + n] += v.real();
          h.im[base + n] += v.imag();
        }
      }
    }
  }
  return h;
}

void PdpBinning::validate() const {
  if (n_bins == 0) throw ConfigError("PDP needs at least one bin");
  if (!(bin_width > 0)) throw ConfigError("PDP bin width must be positive");
}

PdpBinning PdpBinning::for_carrier(const CarrierConfig& carrier, std::size_t n_bins) {
  return PdpBinning{n_bins, 1.0 / carrier.bandwidth};
}

double PowerDelayProfile::total() const {
  double s = 0.0;
  for (double b : bins) s += b;
  return s;
}

PowerDelayProfile ground_truth_pdp(std::span<const Path> paths, const PdpBinning& binning) {
  binning.validate();
  PowerDelayProfile pdp{std::vector<double>(binning.n_bins, 0.0), binning.bin_width};
  for (std::size_t l = 0; l < paths.size(); ++l) {
    const double d = paths[l].delay;
    // The small relative guard keeps delays that are exact bin multiples
    // (e.g. 100 ns / 6.25 ns) from rounding into the bin below.
    const double pos = d / binning.bin_width * (1.0 + 1e-12);
    if (!(d >= 0) || pos >= static_cast<double>(binning.n_bins)) {
      throw RangeError("path " + std::to_string(l) + " delay " + std::to_string(d * 1e9) +
                       " ns lies outside the " + std::to_string(binning.n_bins) + "-bin PDP window");
    }
    const double a = paths[l].amplitude;
    pdp.bins[static_cast<std::size_t>(pos)] += a * a;
  }
  return pdp;
}

PdpGrid ground_truth_pdp(const PathSet& ps, const PdpBinning& binning) {
  PdpGrid grid;
  grid.n_rx = ps.n_rx;
  grid.n_tx = ps.n_tx;
  grid.profiles.reserve(ps.n_rx * ps.n_tx);
  for (std::size_t m = 0; m < ps.n_rx; ++m) {
    for (std::size_t k = 0; k < ps.n_tx; ++k) {
      const std::vector<Path> paths = ps.pair_paths(m, k);
      grid.profiles.push_back(ground_truth_pdp(paths, binning));
    }
  }
  return grid;
}

}  // namespace cext
