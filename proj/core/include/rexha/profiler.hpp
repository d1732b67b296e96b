#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rexha/corpus.hpp"
#include "rexha/retry.hpp"

namespace rexha::profiler {

/// Port to an instruction-following summarization model. Implementations
/// must tolerate concurrent calls.
class Summarizer {
 public:
  virtual ~Summarizer() = default;

  virtual std::string summarize(std::string_view instruction, std::span<const std::string> inputs) = 0;

  // Maximum combined input size per call, in bytes of UTF-8.
  virtual std::size_t input_budget() const = 0;

  virtual std::string identity() const = 0;
};

struct CallOptions {
  RetryPolicy retry;
  Sleeper sleep = default_sleep;
  // A lone input is returned unchanged without calling the model.
  bool passthrough_singleton = false;
};

/// Summarizes one group of texts. Each input is clipped to
/// budget / |texts| bytes first. Blank model output counts as a failed
/// attempt; retryable failures are retried per options.retry.
std::string summarize_group(Summarizer& summarizer, std::span<const std::string> texts,
                            std::string_view instruction, const CallOptions& options = {});

enum class ProfileMode { kHierarchical, kRandomSample, kDirect, kSecondLayer };

std::string_view to_string(ProfileMode mode) noexcept;
ProfileMode parse_profile_mode(std::string_view name);

struct ProfilerConfig {
  std::size_t arity = 4;
  std::uint64_t seed = 0;
  ProfileMode mode = ProfileMode::kHierarchical;
  std::size_t sample_size = 4;  // random_sample(n)
  std::size_t max_concurrency = 1;
  RetryPolicy retry;
  Sleeper sleep = default_sleep;

  void validate() const;
};

struct TreeNode {
  std::vector<std::size_t> children;  // indices into the level below
  std::string text;
  bool summarized = false;            // false for leaves and promoted singletons
  std::optional<std::size_t> source;  // leaves: index into the input sequence
};

/// k-ary aggregation tree. levels[0] holds one raw text per leaf in shuffled
/// order; level l+1 groups consecutive runs of `arity` nodes of level l.
struct AggregationTree {
  std::size_t arity = 0;
  std::vector<std::vector<TreeNode>> levels;
  std::uint32_t summarizer_calls = 0;
  std::string summarizer_identity;

  const TreeNode& root() const { return levels.back().front(); }
  std::string digest() const;
};

struct TreeOptions {
  // Stop at the level whose nodes would be the root's children.
  bool stop_below_root = false;
};

/// Builds the tree bottom-up. Groups of two or more are summarized; a
/// singleton group is promoted unchanged, except when the whole input is one
/// text, which is summarized once so the root is always model output. Levels
/// are barriers; groups within a level run concurrently up to
/// config.max_concurrency and the result does not depend on scheduling.
AggregationTree build_tree(Summarizer& summarizer, std::span<const std::string> texts,
                           const ProfilerConfig& config, std::string_view instruction,
                           const TreeOptions& options = {});

enum class SubjectKind { kUser, kItem };

std::string_view to_string(SubjectKind kind) noexcept;

struct Profile {
  SubjectKind kind = SubjectKind::kUser;
  std::string subject_id;
  std::string text;
  std::string tree_digest;
  std::uint32_t calls = 0;
  std::string summarizer;

  friend bool operator==(const Profile&, const Profile&) = default;
};

/// Instruction text per subject kind (rendered prompt templates).
struct Instructions {
  std::string user;
  std::string item;
};

// Leaves are the subject's raw reviews in a seed-determined shuffled order.
// Only ProfileMode::kHierarchical is honored here; see profile_ablation.
Profile build_user_profile(const corpus::Dataset& dataset, std::string_view user_id, Summarizer& summarizer,
                           const ProfilerConfig& config, const Instructions& instructions,
                           const std::map<std::string, std::string, std::less<>>* item_profiles = nullptr);

Profile build_item_profile(const corpus::Dataset& dataset, std::string_view item_id, Summarizer& summarizer,
                           const ProfilerConfig& config, const Instructions& instructions);

/// Non-hierarchical profile modes:
///  - random_sample(n): one call over n seed-sampled reviews
///  - direct: one call over all reviews; kBudgetOverflow if they exceed the budget
///  - second_layer: the root's children joined by newlines
Profile profile_ablation(const corpus::Dataset& dataset, SubjectKind kind, std::string_view subject_id,
                         Summarizer& summarizer, const ProfilerConfig& config, const Instructions& instructions);

// Dispatches on config.mode.
Profile build_profile(const corpus::Dataset& dataset, SubjectKind kind, std::string_view subject_id,
                      Summarizer& summarizer, const ProfilerConfig& config, const Instructions& instructions,
                      const std::map<std::string, std::string, std::less<>>* item_profiles = nullptr);

/// Level-0 opinion: a one-review summary, the unit indexed for retrieval.
struct Opinion {
  corpus::ReviewId review_id = 0;
  std::string user_id;
  std::string item_id;
  std::string text;

  friend bool operator==(const Opinion&, const Opinion&) = default;
};

std::vector<Opinion> summarize_opinions(const corpus::Dataset& dataset, Summarizer& summarizer,
                                        std::string_view instruction, std::size_t max_concurrency,
                                        const CallOptions& options = {});

// JSON-lines codecs.
std::string profile_to_json(const Profile& profile);
Profile profile_from_json(std::string_view line);
std::string opinion_to_json(const Opinion& opinion);  // {"review_id","opinion"} plus user/item
Opinion opinion_from_json(std::string_view line);

}  // namespace rexha::profiler
