#pragma once

// JSON-over-HTTP adapters for the model ports. Credentials come only from the
// environment variable named by Endpoint::api_key_env (sent as a Bearer token).

#include <chrono>
#include <string>

#include "rexha/evalkit.hpp"
#include "rexha/profiler.hpp"
#include "rexha/prompt.hpp"
#include "rexha/retrieval.hpp"

namespace rexha::http {

inline constexpr const char* kDefaultApiKeyEnv = "REXHA_API_KEY";

struct Endpoint {
  std::string url;  // http(s)://host[:port]/path
  std::string model;
  std::chrono::seconds timeout{60};
  std::string api_key_env = kDefaultApiKeyEnv;
};

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url);

/// POSTs a JSON body and returns the parsed JSON response text. Connection
/// failures, 429 and 5xx map to kTransport (retryable); other non-2xx
/// statuses to kValidation; an unparseable body to kParse.
std::string post_json(const Endpoint& endpoint, const std::string& body);

/// {"instruction","inputs","model","temperature"} -> {"summary"}
class HttpSummarizer final : public profiler::Summarizer {
 public:
  HttpSummarizer(Endpoint endpoint, double temperature, std::size_t input_budget)
      : endpoint_(std::move(endpoint)), temperature_(temperature), budget_(input_budget) {}

  std::string summarize(std::string_view instruction, std::span<const std::string> inputs) override;
  std::size_t input_budget() const override { return budget_; }
  std::string identity() const override { return "http:" + endpoint_.model; }

 private:
  Endpoint endpoint_;
  double temperature_;
  std::size_t budget_;
};

/// {"inputs","model"} -> {"vectors"}
class HttpEmbedder final : public retrieval::Embedder {
 public:
  HttpEmbedder(Endpoint endpoint, std::size_t dimension) : endpoint_(std::move(endpoint)), dim_(dimension) {}

  std::vector<std::vector<float>> embed(std::span<const std::string> texts) override;
  std::size_t dimension() const override { return dim_; }
  std::string identity() const override { return "http:" + endpoint_.model; }

 private:
  Endpoint endpoint_;
  std::size_t dim_;
};

/// {"prompt","temperature","max_tokens","model","embeddings":{marker:[...]}} -> {"text"}
class HttpGenerator final : public prompt::Generator {
 public:
  explicit HttpGenerator(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}

  std::string generate(const prompt::PromptBundle& bundle, const prompt::GenerationSettings& settings) override;
  std::string identity() const override { return "http:" + endpoint_.model; }

 private:
  Endpoint endpoint_;
};

/// {"instruction","reference","candidate","model","temperature"} -> {"score"}
class HttpJudge final : public eval::Judge {
 public:
  HttpJudge(Endpoint endpoint, double temperature) : endpoint_(std::move(endpoint)), temperature_(temperature) {}

  double score(std::string_view instruction, std::string_view reference, std::string_view candidate) override;
  std::string identity() const override { return "http:" + endpoint_.model; }

 private:
  Endpoint endpoint_;
  double temperature_;
};

}  // namespace rexha::http
