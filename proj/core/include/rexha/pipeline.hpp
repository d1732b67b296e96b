#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rexha/config.hpp"
#include "rexha/evalkit.hpp"
#include "rexha/profiler.hpp"
#include "rexha/prompt.hpp"
#include "rexha/retrieval.hpp"

namespace rexha::pipeline {

/// Non-owning view of the model ports a run uses. judge may be null.
struct Ports {
  profiler::Summarizer* summarizer = nullptr;
  retrieval::Embedder* embedder = nullptr;
  prompt::Generator* generator = nullptr;
  eval::TokenEmbedder* token_embedder = nullptr;
  eval::Judge* judge = nullptr;
};

/// Ports built from config.ports (mock or http).
struct OwnedPorts {
  std::unique_ptr<profiler::Summarizer> summarizer;
  std::unique_ptr<retrieval::Embedder> embedder;
  std::unique_ptr<prompt::Generator> generator;
  std::unique_ptr<eval::TokenEmbedder> token_embedder;
  std::unique_ptr<eval::Judge> judge;

  Ports view() const;
};

OwnedPorts make_ports(const PipelineConfig& config);

enum class Stage {
  kIngest,
  kSplit,
  kTrainGcn,
  kBuildProfiles,
  kEmbed,
  kFinetuneAdapter,
  kRetrieve,
  kAssemble,
  kGenerate,
  kEvaluate,
};

std::string_view to_string(Stage stage) noexcept;
Stage parse_stage(std::string_view name);
const std::vector<Stage>& all_stages();

// Token ids of the lowercase words of `text`, hashed into [0, vocab_size) and
// truncated to max_tokens. Text without words maps to {0}.
std::vector<std::uint32_t> tokenize_target(std::string_view text, std::size_t vocab_size, std::size_t max_tokens);

struct StageRecord {
  std::string name;
  std::string status;  // ran | cached | skipped
  std::string key;     // content digest of inputs + relevant settings
  std::map<std::string, std::string> outputs;  // file -> digest
  double ms = 0.0;
  std::string note;
};

struct RunManifest {
  std::string config_digest;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::size_t> threads;
  std::map<std::string, std::string> ports;
  std::vector<StageRecord> stages;  // pipeline order
  std::map<std::string, std::string> artifacts;
  std::string error;

  const StageRecord* find(std::string_view stage) const;
  std::string to_json() const;
  static RunManifest from_json(std::string_view text);
};

struct RunOptions {
  std::function<void(std::string_view)> log;
};

/// Executes stages against a run directory. Every stage reads its inputs from
/// and writes its outputs to that directory; a stage whose key and outputs are
/// unchanged is not re-executed. manifest.json is rewritten after each stage.
class Runner {
 public:
  Runner(PipelineConfig config, Ports ports, RunOptions options = {});

  const StageRecord& run_stage(Stage stage);
  const RunManifest& run_all();

  const RunManifest& manifest() const noexcept { return manifest_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }
  const PipelineConfig& config() const noexcept { return config_; }

 private:
  struct StageResult;

  StageResult execute(Stage stage);
  std::string stage_key(Stage stage) const;
  bool skipped(Stage stage, std::string* why) const;
  void log(const std::string& line) const;
  void write_manifest();

  PipelineConfig config_;
  Ports ports_;
  RunOptions options_;
  std::filesystem::path dir_;
  RunManifest manifest_;
};

// Validates the config, then runs every stage in order.
RunManifest run_pipeline(const PipelineConfig& config, Ports ports, RunOptions options = {});

// File names inside the run directory.
namespace artifact {
inline constexpr const char* kReviews = "reviews.jsonl";
inline constexpr const char* kSplit = "split.json";
inline constexpr const char* kTrain = "train.jsonl";
inline constexpr const char* kTest = "test.jsonl";
inline constexpr const char* kCheckpoint = "gcn.ckpt";
inline constexpr const char* kGcnLog = "gcn_train.json";
inline constexpr const char* kOpinions = "opinions.jsonl";
inline constexpr const char* kProfiles = "profiles.jsonl";
inline constexpr const char* kEmbeddings = "opinions.rxha";
inline constexpr const char* kAdapter = "adapter.json";
inline constexpr const char* kAdapterLog = "adapter_train.json";
inline constexpr const char* kRetrieved = "retrieved.jsonl";
inline constexpr const char* kPrompts = "prompts.jsonl";
inline constexpr const char* kCandidates = "candidates.jsonl";
inline constexpr const char* kReport = "report.json";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace artifact

}  // namespace rexha::pipeline
