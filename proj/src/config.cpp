#include "cext/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cext/error.hpp"

namespace cext {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a number");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a non-negative integer");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

KeyValues KeyValues::parse(const std::string& text, const std::string& origin) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    kv.values_[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValues KeyValues::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void KeyValues::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || trim(assignment.substr(0, eq)).empty()) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

void KeyValues::merge(const KeyValues& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::string KeyValues::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValues::get(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(key, it->second);
}

std::size_t KeyValues::get(const std::string& key, std::size_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : static_cast<std::size_t>(parse_u64(key, it->second));
}

std::uint64_t KeyValues::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_u64(key, it->second);
}

bool KeyValues::get(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<double> KeyValues::get_list(const std::string& key, std::vector<double> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

KeyValues KeyValues::section(const std::string& prefix) const {
  KeyValues out;
  for (const auto& [k, v] : values_) {
    if (k.rfind(prefix, 0) == 0) out.values_[k.substr(prefix.size())] = v;
  }
  return out;
}

std::string KeyValues::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

void read_into(const KeyValues& kv, ArrayGeometry& g, const std::string& p) {
  g.n_tx = kv.get(p + "n_tx", g.n_tx);
  g.n_rx = kv.get(p + "n_rx", g.n_rx);
  const std::string layout = kv.get(p + "layout", g.layout == ArrayLayout::Planar ? "planar" : "linear");
  if (layout == "linear") {
    g.layout = ArrayLayout::Linear;
  } else if (layout == "planar") {
    g.layout = ArrayLayout::Planar;
  } else {
    throw ConfigError("unknown array layout '" + layout + "' (linear, planar)");
  }
  g.planar_width = kv.get(p + "planar_width", g.planar_width);
  g.element_spacing = kv.get(p + "element_spacing", g.element_spacing);
  g.validate();
}

void read_into(const KeyValues& kv, CarrierConfig& c, const std::string& p) {
  if (kv.has(p + "preset")) c = CarrierConfig::preset(kv.get(p + "preset", "3.5GHz"));
  c.center_frequency = kv.get(p + "center_frequency", c.center_frequency);
  c.n_subcarriers = kv.get(p + "n_subcarriers", c.n_subcarriers);
  c.subcarrier_spacing = kv.get(p + "subcarrier_spacing", c.subcarrier_spacing);
  c.bandwidth = kv.get(p + "bandwidth", c.bandwidth);
  c.validate();
}

void read_into(const KeyValues& kv, ScenarioConfig& s, const std::string& p) {
  if (kv.has(p + "kind")) s.kind = parse_scenario_kind(kv.get(p + "kind", "statistical"));
  s.n_paths = kv.get(p + "n_paths", s.n_paths);
  s.max_delay = kv.get(p + "max_delay", s.max_delay);
  s.min_first_delay = kv.get(p + "min_first_delay", s.min_first_delay);
  s.max_first_delay = kv.get(p + "max_first_delay", s.max_first_delay);
  s.delay_spread = kv.get(p + "delay_spread", s.delay_spread);
  s.decay_exponent = kv.get(p + "decay_exponent", s.decay_exponent);
  s.path_power_std_db = kv.get(p + "path_power_std_db", s.path_power_std_db);
  s.gain_db_min = kv.get(p + "gain_db_min", s.gain_db_min);
  s.gain_db_max = kv.get(p + "gain_db_max", s.gain_db_max);
  s.aod_az_min = kv.get(p + "aod_az_min", s.aod_az_min);
  s.aod_az_max = kv.get(p + "aod_az_max", s.aod_az_max);
  s.aod_el_min = kv.get(p + "aod_el_min", s.aod_el_min);
  s.aod_el_max = kv.get(p + "aod_el_max", s.aod_el_max);
  s.aoa_az_min = kv.get(p + "aoa_az_min", s.aoa_az_min);
  s.aoa_az_max = kv.get(p + "aoa_az_max", s.aoa_az_max);
  s.aoa_el_min = kv.get(p + "aoa_el_min", s.aoa_el_min);
  s.aoa_el_max = kv.get(p + "aoa_el_max", s.aoa_el_max);
  s.site_seed = kv.get_u64(p + "site_seed", s.site_seed);
  s.street_width = kv.get(p + "street_width", s.street_width);
  s.bs_y = kv.get(p + "bs_y", s.bs_y);
  s.bs_height = kv.get(p + "bs_height", s.bs_height);
  s.ue_height = kv.get(p + "ue_height", s.ue_height);
  s.ue_x_min = kv.get(p + "ue_x_min", s.ue_x_min);
  s.ue_x_max = kv.get(p + "ue_x_max", s.ue_x_max);
  s.ue_margin = kv.get(p + "ue_margin", s.ue_margin);
  s.wall_reflection = kv.get(p + "wall_reflection", s.wall_reflection);
  s.ground_reflection = kv.get(p + "ground_reflection", s.ground_reflection);
  s.n_scatterers = kv.get(p + "n_scatterers", s.n_scatterers);
  s.scatterer_gain = kv.get(p + "scatterer_gain", s.scatterer_gain);
  s.reference_frequency = kv.get(p + "reference_frequency", s.reference_frequency);
  s.extra_attenuation_exponent = kv.get(p + "extra_attenuation_exponent", s.extra_attenuation_exponent);
  s.coherent_phase = kv.get(p + "coherent_phase", s.coherent_phase);
  s.delay_grid = kv.get(p + "delay_grid", s.delay_grid);
  s.jitter_log_amp = kv.get(p + "jitter_log_amp", s.jitter_log_amp);
  s.jitter_phase = kv.get(p + "jitter_phase", s.jitter_phase);
  s.jitter_delay = kv.get(p + "jitter_delay", s.jitter_delay);
  s.validate();
}

void read_into(const KeyValues& kv, PdpBinning& b, const std::string& p) {
  b.n_bins = kv.get(p + "n_bins", b.n_bins);
  b.bin_width = kv.get(p + "bin_width", b.bin_width);
  b.validate();
}

void read_into(const KeyValues& kv, ExtrapolatorConfig& e, const std::string& p) {
  e.n_rx = kv.get(p + "n_rx", e.n_rx);
  e.n_tx = kv.get(p + "n_tx", e.n_tx);
  e.patch = kv.get(p + "patch", e.patch);
  e.csi_channels = kv.get(p + "csi_channels", e.csi_channels);
  e.mp_channels = kv.get(p + "mp_channels", e.mp_channels);
  e.embed_dim = kv.get(p + "embed_dim", e.embed_dim);
  e.encoder_depth = kv.get(p + "encoder_depth", e.encoder_depth);
  e.decoder_depth = kv.get(p + "decoder_depth", e.decoder_depth);
  e.heads = kv.get(p + "heads", e.heads);
  e.ffn_ratio = kv.get(p + "ffn_ratio", e.ffn_ratio);
  e.decoder_dim = kv.get(p + "decoder_dim", e.decoder_dim);
  e.decoder_heads = kv.get(p + "decoder_heads", e.decoder_heads);
  e.droppath = kv.get(p + "droppath", e.droppath);
  if (kv.has(p + "fusion")) e.fusion = parse_fusion_kind(kv.get(p + "fusion", "cross"));
  e.validate();
}

void write_from(KeyValues& kv, const ArrayGeometry& g, const std::string& p) {
  kv.set(p + "n_tx", std::to_string(g.n_tx));
  kv.set(p + "n_rx", std::to_string(g.n_rx));
  kv.set(p + "layout", g.layout == ArrayLayout::Planar ? "planar" : "linear");
  kv.set(p + "planar_width", std::to_string(g.planar_width));
  kv.set(p + "element_spacing", format_double(g.element_spacing));
}

void write_from(KeyValues& kv, const CarrierConfig& c, const std::string& p) {
  kv.set(p + "center_frequency", format_double(c.center_frequency));
  kv.set(p + "n_subcarriers", std::to_string(c.n_subcarriers));
  kv.set(p + "subcarrier_spacing", format_double(c.subcarrier_spacing));
  kv.set(p + "bandwidth", format_double(c.bandwidth));
}

void write_from(KeyValues& kv, const ScenarioConfig& s, const std::string& p) {
  kv.set(p + "kind", to_string(s.kind));
  kv.set(p + "n_paths", std::to_string(s.n_paths));
  kv.set(p + "max_delay", format_double(s.max_delay));
  kv.set(p + "min_first_delay", format_double(s.min_first_delay));
  kv.set(p + "max_first_delay", format_double(s.max_first_delay));
  kv.set(p + "delay_spread", format_double(s.delay_spread));
  kv.set(p + "decay_exponent", format_double(s.decay_exponent));
  kv.set(p + "path_power_std_db", format_double(s.path_power_std_db));
  kv.set(p + "gain_db_min", format_double(s.gain_db_min));
  kv.set(p + "gain_db_max", format_double(s.gain_db_max));
  kv.set(p + "aod_az_min", format_double(s.aod_az_min));
  kv.set(p + "aod_az_max", format_double(s.aod_az_max));
  kv.set(p + "aod_el_min", format_double(s.aod_el_min));
  kv.set(p + "aod_el_max", format_double(s.aod_el_max));
  kv.set(p + "aoa_az_min", format_double(s.aoa_az_min));
  kv.set(p + "aoa_az_max", format_double(s.aoa_az_max));
  kv.set(p + "aoa_el_min", format_double(s.aoa_el_min));
  kv.set(p + "aoa_el_max", format_double(s.aoa_el_max));
  kv.set(p + "site_seed", std::to_string(s.site_seed));
  kv.set(p + "street_width", format_double(s.street_width));
  kv.set(p + "bs_y", format_double(s.bs_y));
  kv.set(p + "bs_height", format_double(s.bs_height));
  kv.set(p + "ue_height", format_double(s.ue_height));
  kv.set(p + "ue_x_min", format_double(s.ue_x_min));
  kv.set(p + "ue_x_max", format_double(s.ue_x_max));
  kv.set(p + "ue_margin", format_double(s.ue_margin));
  kv.set(p + "wall_reflection", format_double(s.wall_reflection));
  kv.set(p + "ground_reflection", format_double(s.ground_reflection));
  kv.set(p + "n_scatterers", std::to_string(s.n_scatterers));
  kv.set(p + "scatterer_gain", format_double(s.scatterer_gain));
  kv.set(p + "reference_frequency", format_double(s.reference_frequency));
  kv.set(p + "extra_attenuation_exponent", format_double(s.extra_attenuation_exponent));
  kv.set(p + "coherent_phase", s.coherent_phase ? "true" : "false");
  kv.set(p + "delay_grid", format_double(s.delay_grid));
  kv.set(p + "jitter_log_amp", format_double(s.jitter_log_amp));
  kv.set(p + "jitter_phase", format_double(s.jitter_phase));
  kv.set(p + "jitter_delay", format_double(s.jitter_delay));
}

void write_from(KeyValues& kv, const PdpBinning& b, const std::string& p) {
  kv.set(p + "n_bins", std::to_string(b.n_bins));
  kv.set(p + "bin_width", format_double(b.bin_width));
}

void write_from(KeyValues& kv, const ExtrapolatorConfig& e, const std::string& p) {
  kv.set(p + "n_rx", std::to_string(e.n_rx));
  kv.set(p + "n_tx", std::to_string(e.n_tx));
  kv.set(p + "patch", std::to_string(e.patch));
  kv.set(p + "csi_channels", std::to_string(e.csi_channels));
  kv.set(p + "mp_channels", std::to_string(e.mp_channels));
  kv.set(p + "embed_dim", std::to_string(e.embed_dim));
  kv.set(p + "encoder_depth", std::to_string(e.encoder_depth));
  kv.set(p + "decoder_depth", std::to_string(e.decoder_depth));
  kv.set(p + "heads", std::to_string(e.heads));
  kv.set(p + "ffn_ratio", std::to_string(e.ffn_ratio));
  kv.set(p + "decoder_dim", std::to_string(e.decoder_dim));
  kv.set(p + "decoder_heads", std::to_string(e.decoder_heads));
  kv.set(p + "droppath", format_double(e.droppath));
  kv.set(p + "fusion", to_string(e.fusion));
}

}  // namespace cext
