#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rexha::corpus {

using ReviewId = std::uint64_t;

struct Review {
  ReviewId id = 0;  // 1-based source line unless the record carries "review_id"
  std::string user_id;
  std::string item_id;
  std::string text;
  std::optional<std::string> explanation;

  friend bool operator==(const Review&, const Review&) = default;
};

enum class DuplicatePolicy { kReject, kKeepLatest };

using PositionIndex = std::map<std::string, std::vector<std::size_t>, std::less<>>;

/// Validated review collection with user and item indexes.
///
/// Indexes map an id to positions in reviews(), in ascending order. Every
/// review is reachable from exactly one entry of each index. Immutable once
/// built.
class Dataset {
 public:
  Dataset() = default;

  static Dataset from_reviews(std::vector<Review> reviews,
                              DuplicatePolicy duplicates = DuplicatePolicy::kReject);

  std::span<const Review> reviews() const noexcept { return reviews_; }
  std::size_t size() const noexcept { return reviews_.size(); }
  bool empty() const noexcept { return reviews_.empty(); }

  const PositionIndex& user_index() const noexcept { return user_index_; }
  const PositionIndex& item_index() const noexcept { return item_index_; }

  bool has_user(std::string_view user_id) const;
  bool has_item(std::string_view item_id) const;

  // Throws Error(kNotFound, "unknown user: ...") / "unknown item: ...".
  std::vector<const Review*> reviews_of_user(std::string_view user_id) const;
  std::vector<const Review*> reviews_of_item(std::string_view item_id) const;

  const Review* find(ReviewId id) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.reviews_ == b.reviews_;
  }

 private:
  std::vector<Review> reviews_;
  PositionIndex user_index_;
  PositionIndex item_index_;
  std::map<ReviewId, std::size_t> by_id_;
};

struct LoadOptions {
  DuplicatePolicy duplicates = DuplicatePolicy::kReject;
};

// JSON-lines: {"user_id", "item_id", "review", "explanation"?, "review_id"?}.
Dataset load_reviews(const std::filesystem::path& path, const LoadOptions& options = {});
Dataset parse_reviews(std::istream& in, const LoadOptions& options = {});

void write_reviews(const Dataset& dataset, std::ostream& out);
void write_reviews(const Dataset& dataset, const std::filesystem::path& path);

/// Bipartite user-item graph in CSR form. Ordinals follow the sorted order of
/// the string ids when built from a Dataset.
class InteractionGraph {
 public:
  using Edge = std::pair<std::uint32_t, std::uint32_t>;  // (user, item)

  InteractionGraph() = default;

  // Duplicate edges collapse. Nodes without edges are allowed here;
  // validate() reports them.
  static InteractionGraph from_edges(std::size_t num_users, std::size_t num_items,
                                     std::span<const Edge> edges);

  std::size_t num_users() const noexcept { return user_offsets_.empty() ? 0 : user_offsets_.size() - 1; }
  std::size_t num_items() const noexcept { return item_offsets_.empty() ? 0 : item_offsets_.size() - 1; }
  std::size_t num_edges() const noexcept { return user_adj_.size(); }

  std::span<const std::uint32_t> items_of(std::uint32_t user) const;
  std::span<const std::uint32_t> users_of(std::uint32_t item) const;
  std::size_t user_degree(std::uint32_t user) const { return items_of(user).size(); }
  std::size_t item_degree(std::uint32_t item) const { return users_of(item).size(); }

  std::vector<Edge> edges() const;

  std::span<const std::string> user_ids() const noexcept { return user_ids_; }
  std::span<const std::string> item_ids() const noexcept { return item_ids_; }
  std::optional<std::uint32_t> user_ordinal(std::string_view user_id) const;
  std::optional<std::uint32_t> item_ordinal(std::string_view item_id) const;

  // Throws Error(kValidation) on a zero-degree node or asymmetric adjacency.
  void validate() const;

 private:
  friend InteractionGraph build_interaction_graph(const Dataset& dataset);

  std::vector<std::size_t> user_offsets_;
  std::vector<std::uint32_t> user_adj_;
  std::vector<std::size_t> item_offsets_;
  std::vector<std::uint32_t> item_adj_;
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
};

InteractionGraph build_interaction_graph(const Dataset& dataset);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Split {
  Dataset train;
  Dataset test;
};

// test size = max(1, round((1 - fraction) * n)); train gets the remainder and
// must be non-empty. Both partitions keep the input order.
Split split(const Dataset& dataset, const SplitSpec& spec);

// {"seed": u64, "train": [review ids], "test": [review ids]}
std::string split_manifest_json(const SplitSpec& spec, const Split& parts);

}  // namespace rexha::corpus
