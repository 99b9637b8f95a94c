#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cext/channel.hpp"
#include "cext/config.hpp"

namespace cext {

enum DatasetFlags : std::uint32_t {
  kHasCsi = 1,
  kHasPdp = 2,
  kHasPaths = 4,
};

struct DatasetSample {
  ChannelMatrix csi;
  PdpGrid pdp;
  PathSet paths;  // empty unless the file carries paths
};

/// In-memory form of the dataset file.
///
/// File layout (little-endian): "CEXTDSET", u32 version, u32 flags,
/// geometry/carrier/binning/metadata as key-value text, u64 sample count,
/// u64 header checksum, then the samples, then a u64 payload checksum.
/// Checksums are FNV-1a over the preceding bytes of their section.
struct Dataset {
  ArrayGeometry geometry;
  CarrierConfig carrier;
  PdpBinning binning;
  KeyValues metadata;
  std::uint32_t flags = kHasCsi | kHasPdp;
  std::vector<DatasetSample> samples;

  std::size_t size() const { return samples.size(); }
  bool has(DatasetFlags f) const { return (flags & f) != 0; }
};

inline constexpr std::uint32_t kDatasetVersion = 1;

std::string serialize_dataset(const Dataset& ds);
Dataset deserialize_dataset(const std::string& bytes, const std::string& origin = "<memory>");
void write_dataset(const std::string& path, const Dataset& ds);
Dataset read_dataset(const std::string& path);

struct GenerateConfig {
  ScenarioConfig scenario;
  ArrayGeometry geometry;
  CarrierConfig carrier;
  PdpBinning binning;
  std::size_t n_samples = 2000;
  std::uint64_t seed = 0;
  bool with_paths = false;
};

/// Sample i draws its paths from derive_seed(seed, {i}); the result does not
/// depend on how many samples are generated.
Dataset generate_dataset(const GenerateConfig& cfg);
DatasetSample generate_sample(const GenerateConfig& cfg, std::size_t index);

/// Deterministic split: the first floor(n * train_fraction) samples train,
/// the rest test (at least one of each when n >= 2).
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
Split split_indices(std::size_t n, double train_fraction);

}  // namespace cext
