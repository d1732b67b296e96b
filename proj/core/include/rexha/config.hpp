#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rexha::pipeline {

struct DataConfig {
  std::string reviews;  // JSON-lines corpus
  bool allow_duplicates = false;
  double train_fraction = 0.8;
  std::uint64_t split_seed = 7;
};

struct RunConfig {
  std::string dir = "run";
};

struct ProfilerSettings {
  std::size_t arity = 4;
  std::uint64_t seed = 11;
  std::string mode = "hierarchical";  // hierarchical | random_sample | direct | second_layer
  std::size_t sample_size = 4;
  std::size_t max_concurrency = 1;
  bool include_item_profiles = false;
  std::size_t input_budget = 16384;  // bytes per call, mock and http summarizers
  std::string opinion_template = "templates/summarize_review.txt";
  std::string user_template = "templates/summarize_user.txt";
  std::string item_template = "templates/summarize_item.txt";
};

struct GcnSettings {
  std::size_t d_gcn = 64;
  std::size_t hidden = 256;
  std::uint32_t layers = 2;
  std::size_t d_llm = 64;
  std::size_t vocab_size = 512;
  std::size_t max_target_tokens = 16;
  double learning_rate = 1e-3;
  std::size_t batch_size = 1024;
  std::size_t steps = 100;
  std::uint64_t seed = 13;
  double init_stddev = 0.01;
  bool per_token_normalize = false;
};

struct RetrievalSettings {
  std::string query_type = "latent";  // latent | profile
  std::size_t top_q = 8;
  std::size_t embed_batch = 64;
  double temperature = 0.07;
  std::string contrastive_form = "anchor_vs_all";
  double adapter_learning_rate = 0.05;
  std::size_t adapter_steps = 300;
  std::size_t adapter_batch = 32;
  std::uint64_t adapter_seed = 17;
};

struct GeneratorSettings {
  bool enabled = true;
  double temperature = 0.0;
  std::size_t max_tokens = 128;
  std::string prompt_template = "templates/generate.txt";
  // Fine-tuning settings of the generator; recorded, not used in-repo.
  double train_learning_rate = 8e-4;
  std::size_t train_epochs = 2;
  std::size_t train_batch = 12;
};

struct EvalSettings {
  bool standard_orientation = false;
  bool clip = false;
  bool judge = true;
  std::string judge_template = "templates/judge.txt";
  std::size_t token_dim = 64;
};

struct PortSettings {
  std::string backend = "mock";  // mock | http
  std::size_t embed_dim = 64;
  std::string summarizer_url;
  std::string summarizer_model;
  double summarizer_temperature = 0.0;
  std::string embedder_url;
  std::string embedder_model;
  std::string generator_url;
  std::string generator_model;
  std::string judge_url;
  std::string judge_model;
  std::string api_key_env = "REXHA_API_KEY";
  std::size_t timeout_s = 60;
  int max_retries = 3;
};

struct PipelineConfig {
  DataConfig data;
  RunConfig run;
  ProfilerSettings profiler;
  GcnSettings gcn;
  RetrievalSettings retrieval;
  GeneratorSettings generator;
  EvalSettings eval;
  PortSettings ports;

  // Range and enum checks plus existence of every template file. Throws
  // kValidation naming the first offending field.
  void validate() const;
};

enum class FieldType { kString, kPath, kBool, kInt, kUint, kDouble };

/// One configurable setting, addressed as "section.key" both in TOML and as a
/// --section.key command line flag.
struct Field {
  std::string name;
  FieldType type;
  std::string help;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, std::string_view)> set;  // parses text
  bool in_digest = true;  // false for output locations such as run.dir
};

const std::vector<Field>& fields();
const Field& field(std::string_view name);

// Parses `value` per the field type; kInvalidArgument on bad text.
void set_field(PipelineConfig& config, std::string_view name, std::string_view value);
std::string get_field(const PipelineConfig& config, std::string_view name);

/// Reads TOML. Unknown sections or keys are errors. Relative path fields are
/// resolved against the file's directory.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir);

// Applies "section.key" -> text overrides; relative paths resolve against
// base_dir (normally the working directory).
void apply_overrides(PipelineConfig& config, const std::map<std::string, std::string>& overrides,
                     const std::filesystem::path& base_dir);

/// "name = value" lines in registry order for fields whose name starts with one
/// of `prefixes` (all fields when empty). Basis of config and stage digests.
/// Existing files are represented by their SHA-256, not their path.
std::string canonical_text(const PipelineConfig& config, const std::vector<std::string>& prefixes = {});

std::string to_toml(const PipelineConfig& config);

}  // namespace rexha::pipeline
