#include <algorithm>
#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "rexha/error.hpp"
#include "rexha/retrieval.hpp"

namespace rexha::retrieval {

namespace {
constexpr char kMagic[5] = "RXHA";
}

void write_embedding_cache(const std::filesystem::path& path, const VectorIndex& index) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(kMagic, 4);
  detail::put_le<std::uint32_t>(out, kEmbeddingCacheVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.dimension()));
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(index.size()));
  for (std::size_t r = 0; r < index.size(); ++r) {
    const std::string& id = index.id(r);
    if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error(ErrorKind::kInvalidArgument, "opinion id longer than 65535 bytes");
    }
    detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (float x : index.row(r)) detail::put_f32(out, x);
  }
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

EmbeddingCache read_embedding_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  detail::expect_magic(in, kMagic, path.string());
  const auto version = detail::get_le<std::uint32_t>(in, "version");
  if (version != kEmbeddingCacheVersion) {
    throw Error(ErrorKind::kParse, "unsupported embedding cache version " + std::to_string(version));
  }
  EmbeddingCache cache;
  cache.dimension = detail::get_le<std::uint32_t>(in, "d_e");
  const auto count = detail::get_le<std::uint64_t>(in, "row count");
  // Guard the reserve against a corrupt count.
  const auto file_size = std::filesystem::file_size(path);
  if (count > file_size / (2 + 4 * static_cast<std::uint64_t>(cache.dimension))) {
    throw Error(ErrorKind::kParse, "row count " + std::to_string(count) + " exceeds file size");
  }
  cache.ids.reserve(count);
  cache.rows.reserve(count * cache.dimension);
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto len = detail::get_le<std::uint16_t>(in, "id length");
    std::string id(len, '\0');
    if (!in.read(id.data(), len)) throw Error(ErrorKind::kParse, "truncated file while reading id");
    cache.ids.push_back(std::move(id));
    for (std::size_t k = 0; k < cache.dimension; ++k) cache.rows.push_back(detail::get_f32(in, "row values"));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw Error(ErrorKind::kParse, "trailing bytes after last row");
  return cache;
}

}  // namespace rexha::retrieval
