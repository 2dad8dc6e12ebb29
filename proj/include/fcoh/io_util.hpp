#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <istream>
#include <ostream>

#include "fcoh/errors.hpp"

namespace fcoh::io {

// All on-disk integers and floats are little-endian.

template <typename T>
inline void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
  } else {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
}

template <typename T>
inline T read_le(std::istream& in, const std::filesystem::path& path,
                 const char* what) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw DataError("truncated file: " + path.string() + " while reading " +
                    what);
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline void write_u32(std::ostream& out, std::uint32_t v) { write_le(out, v); }
inline void write_u64(std::ostream& out, std::uint64_t v) { write_le(out, v); }
inline void write_i64(std::ostream& out, std::int64_t v) { write_le(out, v); }
inline void write_i32(std::ostream& out, std::int32_t v) { write_le(out, v); }
inline void write_f32(std::ostream& out, float v) { write_le(out, v); }
inline void write_f64(std::ostream& out, double v) { write_le(out, v); }

inline std::uint32_t read_u32(std::istream& in,
                              const std::filesystem::path& p,
                              const char* what) {
  return read_le<std::uint32_t>(in, p, what);
}
inline std::uint64_t read_u64(std::istream& in,
                              const std::filesystem::path& p,
                              const char* what) {
  return read_le<std::uint64_t>(in, p, what);
}
inline std::int64_t read_i64(std::istream& in, const std::filesystem::path& p,
                             const char* what) {
  return read_le<std::int64_t>(in, p, what);
}
inline std::int32_t read_i32(std::istream& in, const std::filesystem::path& p,
                             const char* what) {
  return read_le<std::int32_t>(in, p, what);
}
inline float read_f32(std::istream& in, const std::filesystem::path& p,
                      const char* what) {
  return read_le<float>(in, p, what);
}
inline double read_f64(std::istream& in, const std::filesystem::path& p,
                       const char* what) {
  return read_le<double>(in, p, what);
}

}  // namespace fcoh::io
