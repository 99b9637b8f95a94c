#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cext/error.hpp"

namespace cext::detail {

static_assert(std::endian::native == std::endian::little, "binary formats assume little-endian");

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void f64s(std::span<const double> v) { bytes(v.data(), v.size() * sizeof(double)); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  /// Appends the FNV-1a hash of everything written since `from`.
  void checksum_since(std::size_t from) { u64(fnv1a(std::string_view(buf_).substr(from))); }
  std::size_t size() const { return buf_.size(); }
  const std::string& buffer() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(std::string data, std::string origin) : buf_(std::move(data)), origin_(std::move(origin)) {}

  void bytes(void* p, std::size_t n) {
    if (n > buf_.size() - pos_) fail("truncated file");
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() { std::uint32_t v; bytes(&v, sizeof v); return v; }
  std::uint64_t u64() { std::uint64_t v; bytes(&v, sizeof v); return v; }
  double f64() { double v; bytes(&v, sizeof v); return v; }
  void f64s(std::span<double> out) { bytes(out.data(), out.size() * sizeof(double)); }
  std::string str(std::size_t limit = 1u << 26) {
    const std::uint64_t n = u64();
    if (n > limit || n > buf_.size() - pos_) fail("string length out of range");
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  void verify_checksum_since(std::size_t from, const char* what) {
    const std::uint64_t want = fnv1a(std::string_view(buf_).substr(from, pos_ - from));
    if (u64() != want) fail(std::string(what) + " checksum mismatch");
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return buf_.size() - pos_; }
  [[noreturn]] void fail(const std::string& why) const { throw IoError(origin_ + ": " + why); }

 private:
  std::string buf_;
  std::string origin_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace cext::detail
