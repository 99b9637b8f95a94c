#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cext/rng.hpp"

namespace cext {

using cdouble = std::complex<double>;

inline constexpr double kSpeedOfLight = 299'792'458.0;

enum class ArrayLayout { Linear, Planar };
enum class ArraySide { Tx, Rx };

struct ArrayGeometry {
  std::size_t n_tx = 16;
  std::size_t n_rx = 8;
  ArrayLayout layout = ArrayLayout::Linear;
  /// Elements per row for planar arrays; the array has n / planar_width rows.
  std::size_t planar_width = 4;
  /// Element spacing in wavelengths.
  double element_spacing = 0.5;

  std::size_t pairs() const { return n_tx * n_rx; }
  void validate() const;
};

/// One propagation path. Angles are measured from the array broadside.
struct Path {
  double amplitude = 0.0;  // linear, >= 0
  double phase = 0.0;      // radians in [0, 2pi)
  double delay = 0.0;      // seconds, >= 0
  double aoa_az = 0.0;
  double aoa_el = 0.0;
  double aod_az = 0.0;
  double aod_el = 0.0;
};

/// Paths shared by the whole array plus small per-antenna-pair perturbations
/// that model spatial non-stationarity.
struct PathSet {
  std::vector<Path> paths;
  std::size_t n_rx = 0;
  std::size_t n_tx = 0;
  // Indexed [(m * n_tx + k) * paths.size() + l]; empty means no jitter.
  std::vector<double> jitter_log_amp;
  std::vector<double> jitter_phase;
  std::vector<double> jitter_delay;

  bool has_jitter() const { return !jitter_log_amp.empty(); }
  /// The paths as seen by antenna pair (m, k), jitter applied.
  std::vector<Path> pair_paths(std::size_t m, std::size_t k) const;
};

struct CarrierConfig {
  double center_frequency = 3.5e9;
  std::size_t n_subcarriers = 200;
  double subcarrier_spacing = 60e3;
  /// Nominal system bandwidth. Stored independently of
  /// n_subcarriers * subcarrier_spacing; it sets the PDP delay resolution.
  double bandwidth = 160e6;

  double effective_bandwidth() const {
    return static_cast<double>(n_subcarriers) * subcarrier_spacing;
  }
  /// Baseband frequency of subcarrier n, centred on zero.
  double subcarrier_frequency(std::size_t n) const;
  double wavelength() const { return kSpeedOfLight / center_frequency; }
  void validate() const;

  static CarrierConfig preset(const std::string& name);
};

enum class ScenarioKind { Statistical, Street };

/// Parameters of the synthetic path generator.
///
/// Statistical: first arrival uniform in [min_first_delay, max_first_delay],
/// excess delays exponential with mean delay_spread, path power
/// exp(-decay_exponent * excess / delay_spread) times a log-normal factor,
/// angles uniform in the given ranges.
///
/// Street: a fixed street canyon (two walls, ground, and a handful of point
/// scatterers placed from site_seed). The UE position is random; delays,
/// angles, amplitudes and phases follow from image-method geometry, so the
/// same sample seed at two carrier frequencies gives aligned geometry.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Statistical;
  std::size_t n_paths = 10;
  double max_delay = 780e-9;

  // statistical
  double min_first_delay = 40e-9;
  double max_first_delay = 250e-9;
  double delay_spread = 60e-9;
  double decay_exponent = 1.0;
  double path_power_std_db = 3.0;
  double gain_db_min = -6.0;
  double gain_db_max = 0.0;
  double aod_az_min = -1.0472, aod_az_max = 1.0472;
  double aod_el_min = -0.2, aod_el_max = 0.2;
  double aoa_az_min = -1.5708, aoa_az_max = 1.5708;
  double aoa_el_min = -0.3, aoa_el_max = 0.3;

  // street
  std::uint64_t site_seed = 1;
  double street_width = 40.0;
  double bs_y = -12.0;
  double bs_height = 12.0;
  double ue_height = 1.5;
  double ue_x_min = 20.0;
  double ue_x_max = 120.0;
  double ue_margin = 3.0;
  double wall_reflection = 0.7;
  double ground_reflection = 0.5;
  std::size_t n_scatterers = 6;
  double scatterer_gain = 0.4;

  /// Carrier at which amplitudes are referenced; other carriers scale
  /// amplitudes by (reference_frequency / f)^(1 + extra_attenuation_exponent).
  double reference_frequency = 3.5e9;
  double extra_attenuation_exponent = 0.5;

  /// Zero every path phase (no carrier term). With a single antenna pair and
  /// delay_grid equal to the PDP bin width, the CSI is then a function of
  /// the PDP.
  bool coherent_phase = false;
  /// When positive, delays are floored onto multiples of this step.
  double delay_grid = 0.0;

  double jitter_log_amp = 0.05;
  double jitter_phase = 0.05;
  double jitter_delay = 0.3e-9;

  void validate() const;
};

ScenarioKind parse_scenario_kind(const std::string& name);
std::string to_string(ScenarioKind kind);

/// Draws the paths for one channel sample. Paths come back sorted by
/// amplitude, strongest first. Deterministic for a given rng state.
PathSet sample_paths(const ScenarioConfig& scenario, const ArrayGeometry& geometry,
                     const CarrierConfig& carrier, Rng& rng);

/// Unit-modulus steering vector. ULA element n gets phase
/// 2*pi*spacing*n*sin(az)*cos(el); planar arrays add 2*pi*spacing*row*sin(el).
std::vector<cdouble> array_response(const ArrayGeometry& geometry, double az, double el,
                                    ArraySide side);

/// Complex CSI over (n_rx, n_tx, n_subcarriers), stored as two real planes.
struct ChannelMatrix {
  std::size_t n_rx = 0;
  std::size_t n_tx = 0;
  std::size_t n_sub = 0;
  std::vector<double> re;
  std::vector<double> im;

  ChannelMatrix() = default;
  ChannelMatrix(std::size_t rx, std::size_t tx, std::size_t sub)
      : n_rx(rx), n_tx(tx), n_sub(sub), re(rx * tx * sub, 0.0), im(rx * tx * sub, 0.0) {}

  std::size_t index(std::size_t m, std::size_t k, std::size_t n) const {
    return (m * n_tx + k) * n_sub + n;
  }
  cdouble at(std::size_t m, std::size_t k, std::size_t n) const {
    const std::size_t i = index(m, k, n);
    return {re[i], im[i]};
  }
  /// [re(0..n_sub), im(0..n_sub)] for one antenna pair.
  std::vector<double> pair_vector(std::size_t m, std::size_t k) const;
  bool operator==(const ChannelMatrix&) const = default;
};

/// h_mk(f) = sum_l a_l e^{j phi_l} e^{-j 2 pi f tau_l} a_r[m] conj(a_t[k]),
/// with f the baseband subcarrier frequency and per-pair jitter applied.
ChannelMatrix synthesize_csi(const PathSet& paths, const ArrayGeometry& geometry,
                             const CarrierConfig& carrier);

struct PdpBinning {
  std::size_t n_bins = 128;
  double bin_width = 6.25e-9;

  double delay_of(std::size_t bin) const { return static_cast<double>(bin) * bin_width; }
  void validate() const;
  static PdpBinning for_carrier(const CarrierConfig& carrier, std::size_t n_bins = 128);
};

/// Power versus delay for one antenna pair; bin i sits at delay i * bin_width.
struct PowerDelayProfile {
  std::vector<double> bins;
  double bin_width = 0.0;

  std::size_t size() const { return bins.size(); }
  double delay_of(std::size_t bin) const { return static_cast<double>(bin) * bin_width; }
  double total() const;
  bool operator==(const PowerDelayProfile&) const = default;
};

/// One profile per antenna pair, indexed m * n_tx + k.
struct PdpGrid {
  std::size_t n_rx = 0;
  std::size_t n_tx = 0;
  std::vector<PowerDelayProfile> profiles;

  const PowerDelayProfile& at(std::size_t m, std::size_t k) const {
    return profiles[m * n_tx + k];
  }
  bool operator==(const PdpGrid&) const = default;
};

/// Bins squared amplitudes by delay. Throws RangeError naming the path whose
/// delay falls past the last bin.
PowerDelayProfile ground_truth_pdp(std::span<const Path> paths, const PdpBinning& binning);

/// Per-pair ground-truth profiles with jitter applied.
PdpGrid ground_truth_pdp(const PathSet& paths, const PdpBinning& binning);

}  // namespace cext
