#pragma once

// Deterministic in-process stand-ins for the model ports. Used by tests, the
// toy corpus run and anywhere a network endpoint is not wanted.

#include <atomic>
#include <cstdint>
#include <string>

#include "rexha/evalkit.hpp"
#include "rexha/profiler.hpp"
#include "rexha/prompt.hpp"
#include "rexha/retrieval.hpp"

namespace rexha::mock {

/// First sentence of each input joined by "; ".
class FirstSentenceSummarizer final : public profiler::Summarizer {
 public:
  explicit FirstSentenceSummarizer(std::size_t budget = std::size_t{1} << 20) : budget_(budget) {}

  std::string summarize(std::string_view instruction, std::span<const std::string> inputs) override;
  std::size_t input_budget() const override { return budget_; }
  std::string identity() const override { return "mock:first-sentence"; }

  std::uint64_t calls() const noexcept { return calls_.load(); }

 private:
  std::size_t budget_;
  std::atomic<std::uint64_t> calls_{0};
};

/// Signed feature hashing of lowercase words into `dimension` buckets. Text
/// without words maps to the zero vector.
class HashEmbedder final : public retrieval::Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = 64) : dim_(dimension) {}

  std::vector<std::vector<float>> embed(std::span<const std::string> texts) override;
  std::size_t dimension() const override { return dim_; }
  std::string identity() const override { return "mock:hash-bow-" + std::to_string(dim_); }

  std::uint64_t calls() const noexcept { return calls_.load(); }

 private:
  std::size_t dim_;
  std::atomic<std::uint64_t> calls_{0};
};

/// One seeded Gaussian unit vector per word, keyed by the word's hash.
class HashTokenEmbedder final : public eval::TokenEmbedder {
 public:
  explicit HashTokenEmbedder(std::size_t dimension = 64, std::uint64_t seed = 0) : dim_(dimension), seed_(seed) {}

  std::vector<eval::Vector> embed_tokens(std::string_view text) override;
  std::string identity() const override { return "mock:hash-token-" + std::to_string(dim_); }

  eval::Vector token_vector(std::string_view token) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// 100 * |candidate| / |reference| in bytes, clipped to 100.
class LengthRatioJudge final : public eval::Judge {
 public:
  double score(std::string_view instruction, std::string_view reference, std::string_view candidate) override;
  std::string identity() const override { return "mock:length-ratio"; }
};

/// Returns the top retrieved opinion's text.
class EchoGenerator final : public prompt::Generator {
 public:
  std::string generate(const prompt::PromptBundle& bundle, const prompt::GenerationSettings& settings) override;
  std::string identity() const override { return "mock:echo-first-opinion"; }
};

}  // namespace rexha::mock
