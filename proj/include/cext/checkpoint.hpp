#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cext/config.hpp"
#include "cext/features.hpp"
#include "cext/nn.hpp"
#include "cext/tensor.hpp"

namespace cext {

/// Versioned model container: kind tag, key-value config, named
/// normalisation statistics and named tensors.
///
/// File layout (little-endian): "CEXTCKPT", u32 version, kind string,
/// config text, u64 stats count then (name, mean, std, eps) each, u64 tensor
/// count then (name, u64 ndim, u64 dims..., f64 data...) each, and a trailing
/// FNV-1a checksum over all preceding bytes.
struct Checkpoint {
  std::string kind;  // "c2p" or "ce"
  KeyValues config;
  std::vector<std::pair<std::string, NormStats>> stats;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const;
  const NormStats& stat(const std::string& name) const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes, const std::string& origin = "<memory>");
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Copies checkpoint tensors into same-named parameters (with `prefix`
/// stripped from checkpoint names). Every parameter must be present with a
/// matching shape.
void assign_parameters(const Checkpoint& ckpt, const ParamList& params, const std::string& prefix = "");
void append_parameters(Checkpoint& ckpt, const ParamList& params, const std::string& prefix = "");

}  // namespace cext
