#pragma once

#include <map>
#include <string>
#include <vector>

#include "cext/channel.hpp"
#include "cext/extrapolator.hpp"

namespace cext {

/// Flat `section.key = value` settings. Lines starting with '#' are
/// comments; later assignments override earlier ones.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text, const std::string& origin = "<text>");
  static KeyValues load(const std::string& path);

  /// Applies a `key=value` override.
  void set_assignment(const std::string& assignment);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void merge(const KeyValues& other);

  std::string get(const std::string& key, const std::string& fallback) const;
  double get(const std::string& key, double fallback) const;
  std::size_t get(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get(const std::string& key, bool fallback) const;
  std::string get(const std::string& key, const char* fallback) const {
    return get(key, std::string(fallback));
  }
  std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const;

  /// Entries whose key starts with `prefix`, with the prefix removed.
  KeyValues section(const std::string& prefix) const;
  const std::map<std::string, std::string>& entries() const { return values_; }
  /// Canonical text form, sorted by key; parse(to_text()) round-trips.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

std::string format_double(double v);

// Reading and writing the library's config structs. Unset keys keep the
// struct's current value.
void read_into(const KeyValues& kv, ArrayGeometry& g, const std::string& prefix = "array.");
void read_into(const KeyValues& kv, CarrierConfig& c, const std::string& prefix = "carrier.");
void read_into(const KeyValues& kv, ScenarioConfig& s, const std::string& prefix = "scenario.");
void read_into(const KeyValues& kv, PdpBinning& b, const std::string& prefix = "pdp.");
void read_into(const KeyValues& kv, ExtrapolatorConfig& e, const std::string& prefix = "model.");

void write_from(KeyValues& kv, const ArrayGeometry& g, const std::string& prefix = "array.");
void write_from(KeyValues& kv, const CarrierConfig& c, const std::string& prefix = "carrier.");
void write_from(KeyValues& kv, const ScenarioConfig& s, const std::string& prefix = "scenario.");
void write_from(KeyValues& kv, const PdpBinning& b, const std::string& prefix = "pdp.");
void write_from(KeyValues& kv, const ExtrapolatorConfig& e, const std::string& prefix = "model.");

}  // namespace cext
