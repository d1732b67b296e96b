#include "rexha/mocks.hpp"

#include <algorithm>
#include <random>

#include "rexha/digest.hpp"
#include "rexha/error.hpp"
#include "rexha/text.hpp"

namespace rexha::mock {

std::string FirstSentenceSummarizer::summarize(std::string_view /*instruction*/, std::span<const std::string> inputs) {
  calls_.fetch_add(1);
  std::vector<std::string> firsts;
  firsts.reserve(inputs.size());
  for (const auto& in : inputs) firsts.push_back(text::first_sentence(in));
  return text::join(firsts, "; ");
}

std::vector<std::vector<float>> HashEmbedder::embed(std::span<const std::string> texts) {
  calls_.fetch_add(1);
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    std::vector<float> v(dim_, 0.0f);
    for (const auto& w : text::words(t)) {
      const std::uint64_t h = fnv1a64(w);
      v[h % dim_] += (h >> 63) != 0 ? -1.0f : 1.0f;
    }
    out.push_back(std::move(v));
  }
  return out;
}

eval::Vector HashTokenEmbedder::token_vector(std::string_view token) const {
  std::mt19937_64 rng(fnv1a64(token) ^ seed_);
  std::normal_distribution<double> normal(0.0, 1.0);
  eval::Vector v(static_cast<Eigen::Index>(dim_));
  do {
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

std::vector<eval::Vector> HashTokenEmbedder::embed_tokens(std::string_view text) {
  if (text::is_blank(text)) throw Error(ErrorKind::kInvalidArgument, "token embedder: empty text");
  auto tokens = text::words(text);
  if (tokens.empty()) tokens.emplace_back(text::trim(text));
  std::vector<eval::Vector> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(token_vector(t));
  return out;
}

double LengthRatioJudge::score(std::string_view /*instruction*/, std::string_view reference,
                               std::string_view candidate) {
  if (reference.empty()) return 0.0;
  return std::min(100.0, 100.0 * static_cast<double>(candidate.size()) / static_cast<double>(reference.size()));
}

std::string EchoGenerator::generate(const prompt::PromptBundle& bundle, const prompt::GenerationSettings& /*settings*/) {
  if (bundle.retrieved.empty()) throw Error(ErrorKind::kValidation, "echo generator: no retrieved opinion");
  return bundle.retrieved.front().text;
}

}  // namespace rexha::mock
