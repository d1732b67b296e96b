#pragma once

// Little-endian primitives shared by the checkpoint and embedding cache formats.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "rexha/error.hpp"

namespace rexha::detail {

template <typename U>
void put_le(std::ostream& out, U value) {
  static_assert(std::is_unsigned_v<U>);
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes, sizeof(U));
}

inline void put_f32(std::ostream& out, float value) { put_le(out, std::bit_cast<std::uint32_t>(value)); }

template <typename U>
U get_le(std::istream& in, const char* what) {
  static_assert(std::is_unsigned_v<U>);
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw Error(ErrorKind::kParse, std::string("truncated file while reading ") + what);
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

inline float get_f32(std::istream& in, const char* what) {
  return std::bit_cast<float>(get_le<std::uint32_t>(in, what));
}

inline void expect_magic(std::istream& in, const char (&magic)[5], const std::string& source) {
  char got[4] = {};
  if (!in.read(got, 4) || std::string(got, 4) != std::string(magic, 4)) {
    throw Error(ErrorKind::kParse, source + ": bad magic, expected \"" + std::string(magic, 4) + "\"");
  }
}

}  // namespace rexha::detail
