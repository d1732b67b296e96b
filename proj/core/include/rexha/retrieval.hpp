#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rexha/profiler.hpp"
#include "rexha/retry.hpp"

namespace rexha::retrieval {

using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Port to a sentence embedding model with a fixed output width.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<std::vector<float>> embed(std::span<const std::string> texts) = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::string identity() const = 0;
};

/// L2-normalized vector; all-zero input yields the zero vector with
/// is_zero() set instead of a NaN direction.
class UnitVector {
 public:
  UnitVector() = default;

  static UnitVector normalize(const Vector& raw);
  static UnitVector normalize(std::span<const float> raw);

  const Vector& vector() const noexcept { return v_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(v_.size()); }
  bool is_zero() const noexcept { return zero_; }
  double dot(const UnitVector& other) const { return v_.dot(other.v_); }

 private:
  Vector v_;
  bool zero_ = true;
};

struct RowMeta {
  std::string user_id;
  std::string item_id;

  friend bool operator==(const RowMeta&, const RowMeta&) = default;
};

/// Unit-norm rows (stored as f32) keyed by opinion id, with the source
/// (user, item) pair of each row. Immutable after construction; safe for
/// concurrent queries.
class VectorIndex {
 public:
  explicit VectorIndex(std::size_t dimension = 0) : dim_(dimension) {}

  // Normalizes `raw`. Throws on duplicate id or width mismatch.
  void add(std::string id, std::span<const float> raw, RowMeta meta);
  // Stores an already unit-norm (or all-zero) row bit-for-bit.
  void add_normalized(std::string id, std::span<const float> unit, RowMeta meta);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dimension() const noexcept { return dim_; }
  std::span<const float> row(std::size_t r) const { return {rows_.data() + r * dim_, dim_}; }
  const std::string& id(std::size_t r) const { return ids_.at(r); }
  const RowMeta& meta(std::size_t r) const { return meta_.at(r); }
  bool is_zero(std::size_t r) const { return zero_.at(r) != 0; }
  std::optional<std::size_t> find(std::string_view id) const;
  std::span<const std::size_t> rows_for_pair(std::string_view user_id, std::string_view item_id) const;
  UnitVector unit_row(std::size_t r) const;

  void reserve(std::size_t rows);

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<float> rows_;
  std::vector<RowMeta> meta_;
  std::vector<unsigned char> zero_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>, std::less<>> by_pair_;
};

struct Document {
  std::string id;
  std::string text;
  RowMeta meta;
};

struct EmbedOptions {
  std::size_t batch_size = 64;
  RetryPolicy retry;
  Sleeper sleep = default_sleep;
};

// Embeds in batches, order preserved. Throws on width drift.
VectorIndex embed_opinions(Embedder& embedder, std::span<const Document> documents, const EmbedOptions& options = {});
VectorIndex embed_opinions(Embedder& embedder, std::span<const profiler::Opinion> opinions,
                           const EmbedOptions& options = {});

std::vector<UnitVector> embed_texts(Embedder& embedder, std::span<const std::string> texts,
                                    const EmbedOptions& options = {});

/// (mean(user) + mean(item)) / 2 before normalization. Zero vectors are
/// skipped; a side with no usable vector is an error.
Vector latent_query_raw(std::span<const UnitVector> user_vectors, std::span<const UnitVector> item_vectors);
UnitVector latent_query(std::span<const UnitVector> user_vectors, std::span<const UnitVector> item_vectors);

// ---------------------------------------------------------------------------
// Profile queries through a trainable affine adapter over a frozen embedder.

struct AdapterParams {
  RowMatrix weight;  // d x d
  Vector bias;       // d

  static AdapterParams identity(std::size_t dimension);
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(bias.size()); }
  void validate() const;

  Vector apply_raw(const Vector& x) const { return weight * x + bias; }
  UnitVector apply(const UnitVector& x) const { return UnitVector::normalize(apply_raw(x.vector())); }

  std::string to_json() const;
  static AdapterParams from_json(std::string_view text);
};

// A base index pushed through the adapter (rows re-normalized).
VectorIndex adapt_index(const VectorIndex& base, const AdapterParams& adapter);

enum class ContrastiveForm {
  // -log( e^{s_ii/t} / (e^{s_ii/t} + sum_{j!=i} e^{s_jj/t}) ): negatives are
  // the other pairs' own positive terms.
  kAsPrinted,
  // -log( e^{s_ii/t} / sum_j e^{sim(p_i, r_j)/t} ): anchor against every opinion.
  kAnchorVsAll,
};

std::string_view to_string(ContrastiveForm form) noexcept;
ContrastiveForm parse_contrastive_form(std::string_view name);

/// Mean over anchors of the InfoNCE term. anchors[i] pairs with positives[i].
double contrastive_loss(std::span<const UnitVector> anchors, std::span<const UnitVector> positives,
                        double temperature, ContrastiveForm form = ContrastiveForm::kAsPrinted);

struct ContrastiveGradient {
  double loss = 0.0;
  RowMatrix weight;
  Vector bias;
};

// Loss and gradient w.r.t. the adapter; rows of profile_base / opinion_base are
// unit base embeddings, both passed through the adapter.
ContrastiveGradient contrastive_gradient(const AdapterParams& adapter, const RowMatrix& profile_base,
                                         const RowMatrix& opinion_base, double temperature, ContrastiveForm form);

struct ContrastiveConfig {
  double temperature = 0.07;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  std::size_t steps = 300;
  std::uint64_t seed = 0;
  ContrastiveForm form = ContrastiveForm::kAnchorVsAll;

  void validate() const;
};

struct AdapterFit {
  AdapterParams params;
  std::vector<double> step_losses;
  double initial_loss = 0.0;  // full-data loss before training
  double final_loss = 0.0;
};

/// SGD on the adapter only; the base embedder is called once per text.
AdapterFit fit_adapter(std::span<const std::pair<std::string, std::string>> pairs, Embedder& base,
                       const ContrastiveConfig& config, const EmbedOptions& embed = {});
AdapterFit fit_adapter(const RowMatrix& profile_base, const RowMatrix& opinion_base, const ContrastiveConfig& config);

std::string profile_query_text(const profiler::Profile& user_profile, const profiler::Profile& item_profile);

UnitVector profile_query(const AdapterParams& adapter, Embedder& base, const profiler::Profile& user_profile,
                         const profiler::Profile& item_profile, const EmbedOptions& embed = {});

// ---------------------------------------------------------------------------

struct Hit {
  std::string id;
  double score = 0.0;

  friend bool operator==(const Hit&, const Hit&) = default;
};

struct RetrievalResult {
  std::string query_id;
  std::vector<Hit> hits;  // score descending, ties by ascending id
  std::size_t requested = 0;
};

using PairKey = std::pair<std::string, std::string>;  // (user_id, item_id)

/// Exact top-q by cosine over non-zero, non-excluded rows. Score of a row is
/// sum_k double(row[k]) * query[k] clamped to [-1, 1].
RetrievalResult retrieve_top_q(const VectorIndex& index, const UnitVector& query, std::size_t q,
                               const std::set<PairKey>& exclude = {}, std::string query_id = {});

/// Pairwise cosine between the retrieved rows (q x q, unit diagonal).
RowMatrix retrieved_set_similarity(const VectorIndex& index, const RetrievalResult& result);
double mean_off_diagonal(const RowMatrix& similarity);

struct LatencyReport {
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double p99_ms = 0.0;
  double mean_ms = 0.0;
  std::size_t rows = 0;
  std::size_t dimension = 0;
  std::size_t queries = 0;
  std::size_t top_q = 0;
  std::size_t threads = 1;

  std::string to_json() const;
};

// Times each query individually on the calling thread.
LatencyReport bench_retrieval(const VectorIndex& index, std::span<const UnitVector> queries, std::size_t q);

VectorIndex random_index(std::size_t rows, std::size_t dimension, std::uint64_t seed);
std::vector<UnitVector> random_queries(std::size_t count, std::size_t dimension, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Embedding cache: "RXHA", u32 version, u32 d_e, u64 count, then per row
// u16 id length, id bytes, d_e little-endian f32.

inline constexpr std::uint32_t kEmbeddingCacheVersion = 1;

struct EmbeddingCache {
  std::size_t dimension = 0;
  std::vector<std::string> ids;
  std::vector<float> rows;  // count x dimension
};

void write_embedding_cache(const std::filesystem::path& path, const VectorIndex& index);
EmbeddingCache read_embedding_cache(const std::filesystem::path& path);

// Rebuilds an index; meta_for(id) supplies the (user, item) of each row.
template <typename MetaFn>
VectorIndex index_from_cache(const EmbeddingCache& cache, MetaFn&& meta_for) {
  VectorIndex index(cache.dimension);
  index.reserve(cache.ids.size());
  for (std::size_t r = 0; r < cache.ids.size(); ++r) {
    index.add_normalized(cache.ids[r], std::span<const float>(cache.rows.data() + r * cache.dimension, cache.dimension),
              meta_for(cache.ids[r]));
  }
  return index;
}

}  // namespace rexha::retrieval
