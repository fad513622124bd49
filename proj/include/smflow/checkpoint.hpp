#pragma once

// Binary field checkpoints, little-endian:
//   8 bytes  magic "SMFLCKPT"
//   u32      version (1)
//   u32      bytes per real component (4 or 8)
//   u64      n
//   f64      half length
//   f64      t
//   n x (re, im) in the stated precision

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "smflow/error.hpp"
#include "smflow/solver.hpp"

namespace smflow::checkpoint {

using spectral::cplx;
using spectral::FieldState;
using spectral::GridSpec;

constexpr char kMagic[8] = {'S', 'M', 'F', 'L', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

enum class Precision : std::uint32_t { Single = 4, Double = 8 };

struct Checkpoint {
  GridSpec grid;
  FieldState state;
  Precision precision = Precision::Double;
};

namespace detail {

template <class T>
void put(std::string& buf, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.append(bytes, sizeof(T));
}

template <class T>
T take(const std::string& buf, std::size_t& pos, const std::string& path) {
  if (pos + sizeof(T) > buf.size()) throw Error(ErrorKind::Io, "checkpoint '" + path + "' is truncated");
  char bytes[sizeof(T)];
  std::memcpy(bytes, buf.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

/// Writes text or bytes to `path` via a temporary file and a rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + tmp + "' for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorKind::Io, "write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename '" + tmp + "': " + ec.message());
}

inline std::string encode(const GridSpec& g, const FieldState& s, Precision p = Precision::Double) {
  if (static_cast<int>(s.z.size()) != g.n) throw Error(ErrorKind::InvalidArgument, "field size differs from grid");
  std::string buf(kMagic, sizeof kMagic);
  detail::put(buf, kVersion);
  detail::put(buf, static_cast<std::uint32_t>(p));
  detail::put(buf, static_cast<std::uint64_t>(g.n));
  detail::put(buf, g.half_length);
  detail::put(buf, s.t);
  for (const auto& v : s.z) {
    if (p == Precision::Double) {
      detail::put(buf, v.real());
      detail::put(buf, v.imag());
    } else {
      detail::put(buf, static_cast<float>(v.real()));
      detail::put(buf, static_cast<float>(v.imag()));
    }
  }
  return buf;
}

inline Checkpoint decode(const std::string& buf, const std::string& path = "<buffer>") {
  if (buf.size() < sizeof kMagic || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorKind::Io, "'" + path + "' is not a checkpoint");
  }
  std::size_t pos = sizeof kMagic;
  const auto version = detail::take<std::uint32_t>(buf, pos, path);
  if (version != kVersion) throw Error(ErrorKind::Io, "unsupported checkpoint version " + std::to_string(version));
  const auto width = detail::take<std::uint32_t>(buf, pos, path);
  if (width != 4 && width != 8) throw Error(ErrorKind::Io, "bad precision field in '" + path + "'");
  const auto n = detail::take<std::uint64_t>(buf, pos, path);
  Checkpoint c;
  c.precision = static_cast<Precision>(width);
  c.grid.n = static_cast<int>(n);
  c.grid.half_length = detail::take<double>(buf, pos, path);
  c.state.t = detail::take<double>(buf, pos, path);
  if (buf.size() - pos != n * 2 * width) throw Error(ErrorKind::Io, "checkpoint '" + path + "' has wrong length");
  c.state.z.resize(n);
  for (auto& v : c.state.z) {
    if (width == 8) {
      const double re = detail::take<double>(buf, pos, path);
      v = cplx(re, detail::take<double>(buf, pos, path));
    } else {
      const float re = detail::take<float>(buf, pos, path);
      v = cplx(re, detail::take<float>(buf, pos, path));
    }
  }
  c.grid.validate();
  return c;
}

inline void save(const std::filesystem::path& path, const GridSpec& g, const FieldState& s,
                 Precision p = Precision::Double) {
  atomic_write(path, encode(g, s, p));
}

inline Checkpoint load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open checkpoint '" + path.string() + "'");
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(buf, path.string());
}

}  // namespace smflow::checkpoint
