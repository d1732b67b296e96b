#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

namespace rexha {

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string sha256_hex(std::string_view bytes);

/// Incremental SHA-256 over an arbitrary byte stream.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(Sha256&&) noexcept;
  Sha256& operator=(Sha256&&) noexcept;

  Sha256& update(std::string_view bytes);
  // Length-prefixed update, so that ("ab","c") and ("a","bc") differ.
  Sha256& field(std::string_view bytes);
  std::string hex();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Cache key / artifact digest: a fast 64-bit FNV-1a plus a SHA-256.
struct ContentDigest {
  std::uint64_t fast = 0;
  std::string strong;  // 64 lowercase hex chars

  std::string str() const;
  friend bool operator==(const ContentDigest&, const ContentDigest&) = default;
};

ContentDigest digest_bytes(std::string_view bytes);
ContentDigest digest_file(const std::filesystem::path& path);

}  // namespace rexha
