#include "cext/checkpoint.hpp"

#include <algorithm>

#include "binary_io.hpp"
#include "cext/error.hpp"

namespace cext {
namespace {

constexpr char kMagic[8] = {'C', 'E', 'X', 'T', 'C', 'K', 'P', 'T'};

}  // namespace

const Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw IoError("checkpoint has no tensor '" + name + "'");
}

const NormStats& Checkpoint::stat(const std::string& name) const {
  for (const auto& [n, s] : stats) {
    if (n == name) return s;
  }
  throw IoError("checkpoint has no statistics '" + name + "'");
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  detail::ByteWriter w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.str(ckpt.kind);
  w.str(ckpt.config.to_text());
  w.u64(ckpt.stats.size());
  for (const auto& [name, s] : ckpt.stats) {
    w.str(name);
    w.f64(s.mean);
    w.f64(s.std);
    w.f64(s.eps);
  }
  w.u64(ckpt.tensors.size());
  for (const auto& [name, t] : ckpt.tensors) {
    w.str(name);
    w.u64(t.ndim());
    for (std::size_t d : t.shape()) w.u64(d);
    w.f64s(t.data());
  }
  w.checksum_since(0);
  return w.buffer();
}

Checkpoint deserialize_checkpoint(const std::string& bytes, const std::string& origin) {
  detail::ByteReader r(bytes, origin);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (!std::equal(magic, magic + 8, kMagic)) r.fail("not a checkpoint file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) r.fail("unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  c.kind = r.str(64);
  c.config = KeyValues::parse(r.str(), origin + " config");
  const std::uint64_t ns = r.u64();
  if (ns > r.remaining() / 32) r.fail("statistics count exceeds file size");
  for (std::uint64_t i = 0; i < ns; ++i) {
    std::string name = r.str(4096);
    NormStats s;
    s.mean = r.f64();
    s.std = r.f64();
    s.eps = r.f64();
    c.stats.emplace_back(std::move(name), s);
  }
  const std::uint64_t nt = r.u64();
  if (nt > r.remaining() / 16) r.fail("tensor count exceeds file size");
  for (std::uint64_t i = 0; i < nt; ++i) {
    std::string name = r.str(4096);
    const std::uint64_t nd = r.u64();
    if (nd > 8) r.fail("tensor '" + name + "' has too many dimensions");
    Shape shape(nd);
    std::size_t numel = 1;
    for (auto& d : shape) {
      d = r.u64();
      if (d != 0 && numel > r.remaining() / d) r.fail("tensor '" + name + "' exceeds file size");
      numel *= d;
    }
    if (numel > r.remaining() / sizeof(double)) r.fail("tensor '" + name + "' exceeds file size");
    std::vector<double> data(numel);
    r.f64s(data);
    c.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  r.verify_checksum_since(0, "checkpoint");
  if (r.remaining() != 0) r.fail("trailing bytes after checksum");
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  detail::write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(detail::read_file(path), path);
}

void assign_parameters(const Checkpoint& ckpt, const ParamList& params, const std::string& prefix) {
  for (const auto& p : params) {
    const Tensor& src = ckpt.tensor(prefix + p.name);
    if (src.shape() != p.tensor.shape()) {
      throw DimensionError("checkpoint tensor '" + prefix + p.name + "' has shape " +
                           shape_str(src.shape()) + ", model expects " + shape_str(p.tensor.shape()));
    }
    Tensor dst = p.tensor;
    std::copy(src.data().begin(), src.data().end(), dst.mutable_data().begin());
  }
}

void append_parameters(Checkpoint& ckpt, const ParamList& params, const std::string& prefix) {
  for (const auto& p : params) ckpt.tensors.emplace_back(prefix + p.name, p.tensor.clone());
}

}  // namespace cext
