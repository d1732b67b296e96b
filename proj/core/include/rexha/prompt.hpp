#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rexha/profiler.hpp"
#include "rexha/retry.hpp"

namespace rexha::prompt {

inline constexpr std::string_view kUserMarker = "<USER_EMBED>";
inline constexpr std::string_view kItemMarker = "<ITEM_EMBED>";

struct RetrievedOpinion {
  std::string id;
  std::string text;
  double score = 0.0;

  friend bool operator==(const RetrievedOpinion&, const RetrievedOpinion&) = default;
};

/// Rendered generation input. The markers stay in the text; the projected
/// embeddings travel next to it keyed by marker.
struct PromptBundle {
  std::string user_id;
  std::string item_id;
  std::string text;
  std::map<std::string, std::vector<double>> sidecar;
  std::vector<RetrievedOpinion> retrieved;

  std::string to_json() const;  // one line
  static PromptBundle from_json(std::string_view line);

  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

/// Replaces every {name} in `tmpl` with values[name] in a single left-to-right
/// pass; inserted text is never rescanned. An unknown {name} is an error.
std::string render(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values);

// "1. first\n2. second"; embedded newlines become spaces.
std::string numbered_list(std::span<const RetrievedOpinion> retrieved);

/// Checks the template carries {user_profile}, {item_profile},
/// {retrieved_reviews} and each marker exactly once.
void validate_template(std::string_view tmpl);

PromptBundle assemble_prompt(const profiler::Profile& user_profile, const profiler::Profile& item_profile,
                             std::span<const RetrievedOpinion> retrieved, const Eigen::VectorXd& user_embedding,
                             const Eigen::VectorXd& item_embedding, std::string_view tmpl);

struct GenerationSettings {
  double temperature = 0.0;
  std::size_t max_tokens = 128;
};

/// Port to the explanation generator.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string generate(const PromptBundle& bundle, const GenerationSettings& settings) = 0;
  virtual std::string identity() const = 0;
};

struct Generation {
  std::string text;
  double latency_ms = 0.0;
};

// Output is returned verbatim; blank output is retried, then reported with the
// bundle's (user, item).
Generation generate(Generator& generator, const PromptBundle& bundle, const GenerationSettings& settings,
                    const RetryPolicy& retry = {}, const Sleeper& sleep = default_sleep);

}  // namespace rexha::prompt
