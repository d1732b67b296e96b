#include "rexha/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "rexha/digest.hpp"
#include "rexha/error.hpp"
#include "rexha/profiler.hpp"
#include "rexha/retrieval.hpp"

namespace rexha::pipeline {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void bad_value(std::string_view name, std::string_view value, std::string_view want) {
  throw Error(ErrorKind::kInvalidArgument,
              std::string(name) + ": expected " + std::string(want) + ", got \"" + std::string(value) + "\"");
}

template <typename T>
T parse_number(std::string_view name, std::string_view text, std::string_view want) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(name, text, want);
  return v;
}

double parse_double(std::string_view name, std::string_view text) {
  // from_chars for double is missing from older libstdc++.
  std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) bad_value(name, text, "number");
  return v;
}

bool parse_bool(std::string_view name, std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  bad_value(name, text, "true or false");
}

template <typename T>
Field make(std::string name, T PipelineConfig::*section, auto T::*member, FieldType type, std::string help,
           bool in_digest = true) {
  using V = std::remove_cvref_t<decltype(std::declval<T&>().*member)>;
  Field f;
  f.name = name;
  f.type = type;
  f.help = std::move(help);
  f.in_digest = in_digest;
  f.get = [section, member](const PipelineConfig& c) -> std::string {
    const V& v = c.*section.*member;
    if constexpr (std::is_same_v<V, std::string>) {
      return v;
    } else if constexpr (std::is_same_v<V, bool>) {
      return v ? "true" : "false";
    } else if constexpr (std::is_floating_point_v<V>) {
      return format_double(v);
    } else {
      return std::to_string(v);
    }
  };
  f.set = [section, member, name](PipelineConfig& c, std::string_view text) {
    V& v = c.*section.*member;
    if constexpr (std::is_same_v<V, std::string>) {
      v = std::string(text);
    } else if constexpr (std::is_same_v<V, bool>) {
      v = parse_bool(name, text);
    } else if constexpr (std::is_floating_point_v<V>) {
      v = parse_double(name, text);
    } else if constexpr (std::is_signed_v<V>) {
      v = parse_number<V>(name, text, "integer");
    } else {
      v = parse_number<V>(name, text, "non-negative integer");
    }
  };
  return f;
}

std::vector<Field> build_fields() {
  using P = PipelineConfig;
  using T = FieldType;
  std::vector<Field> f;
  f.push_back(make("data.reviews", &P::data, &DataConfig::reviews, T::kPath, "reviews JSON-lines file"));
  f.push_back(make("data.allow_duplicates", &P::data, &DataConfig::allow_duplicates, T::kBool,
                   "keep the latest line of a repeated (user, item) pair instead of rejecting"));
  f.push_back(make("data.train_fraction", &P::data, &DataConfig::train_fraction, T::kDouble, "train share in (0,1)"));
  f.push_back(make("data.split_seed", &P::data, &DataConfig::split_seed, T::kUint, "split shuffle seed"));
  f.push_back(make("run.dir", &P::run, &RunConfig::dir, T::kPath, "run directory", false));

  f.push_back(make("profiler.arity", &P::profiler, &ProfilerSettings::arity, T::kUint, "tree arity k >= 2"));
  f.push_back(make("profiler.seed", &P::profiler, &ProfilerSettings::seed, T::kUint, "leaf shuffle seed"));
  f.push_back(make("profiler.mode", &P::profiler, &ProfilerSettings::mode, T::kString,
                   "hierarchical | random_sample | direct | second_layer"));
  f.push_back(make("profiler.sample_size", &P::profiler, &ProfilerSettings::sample_size, T::kUint,
                   "reviews sampled in random_sample mode"));
  f.push_back(make("profiler.max_concurrency", &P::profiler, &ProfilerSettings::max_concurrency, T::kUint,
                   "summarizer calls in flight per level"));
  f.push_back(make("profiler.include_item_profiles", &P::profiler, &ProfilerSettings::include_item_profiles, T::kBool,
                   "append item profiles to user-profile leaves"));
  f.push_back(make("profiler.input_budget", &P::profiler, &ProfilerSettings::input_budget, T::kUint,
                   "summarizer input budget in bytes"));
  f.push_back(make("profiler.opinion_template", &P::profiler, &ProfilerSettings::opinion_template, T::kPath,
                   "instruction for per-review opinions"));
  f.push_back(make("profiler.user_template", &P::profiler, &ProfilerSettings::user_template, T::kPath,
                   "instruction for user profiles"));
  f.push_back(make("profiler.item_template", &P::profiler, &ProfilerSettings::item_template, T::kPath,
                   "instruction for item profiles"));

  f.push_back(make("gcn.d_gcn", &P::gcn, &GcnSettings::d_gcn, T::kUint, "graph embedding width"));
  f.push_back(make("gcn.hidden", &P::gcn, &GcnSettings::hidden, T::kUint, "projection hidden width"));
  f.push_back(make("gcn.layers", &P::gcn, &GcnSettings::layers, T::kUint, "propagation layers L"));
  f.push_back(make("gcn.d_llm", &P::gcn, &GcnSettings::d_llm, T::kUint, "projected width"));
  f.push_back(make("gcn.vocab_size", &P::gcn, &GcnSettings::vocab_size, T::kUint, "token head vocabulary"));
  f.push_back(make("gcn.max_target_tokens", &P::gcn, &GcnSettings::max_target_tokens, T::kUint,
                   "target tokens kept per pair"));
  f.push_back(make("gcn.learning_rate", &P::gcn, &GcnSettings::learning_rate, T::kDouble, "SGD learning rate"));
  f.push_back(make("gcn.batch_size", &P::gcn, &GcnSettings::batch_size, T::kUint, "pairs per batch"));
  f.push_back(make("gcn.steps", &P::gcn, &GcnSettings::steps, T::kUint, "SGD steps"));
  f.push_back(make("gcn.seed", &P::gcn, &GcnSettings::seed, T::kUint, "initialization seed"));
  f.push_back(make("gcn.init_stddev", &P::gcn, &GcnSettings::init_stddev, T::kDouble, "embedding init stddev"));
  f.push_back(make("gcn.per_token_normalize", &P::gcn, &GcnSettings::per_token_normalize, T::kBool,
                   "divide each pair's NLL by its token count"));

  f.push_back(make("retrieval.query_type", &P::retrieval, &RetrievalSettings::query_type, T::kString,
                   "latent | profile"));
  f.push_back(make("retrieval.top_q", &P::retrieval, &RetrievalSettings::top_q, T::kUint, "opinions per prompt"));
  f.push_back(make("retrieval.embed_batch", &P::retrieval, &RetrievalSettings::embed_batch, T::kUint,
                   "texts per embedder call"));
  f.push_back(make("retrieval.temperature", &P::retrieval, &RetrievalSettings::temperature, T::kDouble,
                   "contrastive temperature"));
  f.push_back(make("retrieval.contrastive_form", &P::retrieval, &RetrievalSettings::contrastive_form, T::kString,
                   "as_printed | anchor_vs_all"));
  f.push_back(make("retrieval.adapter_learning_rate", &P::retrieval, &RetrievalSettings::adapter_learning_rate,
                   T::kDouble, "adapter SGD learning rate"));
  f.push_back(make("retrieval.adapter_steps", &P::retrieval, &RetrievalSettings::adapter_steps, T::kUint,
                   "adapter SGD steps"));
  f.push_back(make("retrieval.adapter_batch", &P::retrieval, &RetrievalSettings::adapter_batch, T::kUint,
                   "adapter batch size"));
  f.push_back(make("retrieval.adapter_seed", &P::retrieval, &RetrievalSettings::adapter_seed, T::kUint,
                   "adapter batch shuffle seed"));

  f.push_back(make("generator.enabled", &P::generator, &GeneratorSettings::enabled, T::kBool, "run the generate stage"));
  f.push_back(make("generator.temperature", &P::generator, &GeneratorSettings::temperature, T::kDouble,
                   "sampling temperature"));
  f.push_back(make("generator.max_tokens", &P::generator, &GeneratorSettings::max_tokens, T::kUint,
                   "max output tokens"));
  f.push_back(make("generator.prompt_template", &P::generator, &GeneratorSettings::prompt_template, T::kPath,
                   "generation prompt template"));
  f.push_back(make("generator.train_learning_rate", &P::generator, &GeneratorSettings::train_learning_rate, T::kDouble,
                   "generator fine-tuning lr (recorded only)"));
  f.push_back(make("generator.train_epochs", &P::generator, &GeneratorSettings::train_epochs, T::kUint,
                   "generator fine-tuning epochs (recorded only)"));
  f.push_back(make("generator.train_batch", &P::generator, &GeneratorSettings::train_batch, T::kUint,
                   "generator fine-tuning batch (recorded only)"));

  f.push_back(make("eval.standard_orientation", &P::eval, &EvalSettings::standard_orientation, T::kBool,
                   "swap BERTscore precision and recall"));
  f.push_back(make("eval.clip", &P::eval, &EvalSettings::clip, T::kBool, "clip token similarities at 0"));
  f.push_back(make("eval.judge", &P::eval, &EvalSettings::judge, T::kBool, "score with the judge port"));
  f.push_back(make("eval.judge_template", &P::eval, &EvalSettings::judge_template, T::kPath, "judge instruction"));
  f.push_back(make("eval.token_dim", &P::eval, &EvalSettings::token_dim, T::kUint, "mock token embedding width"));

  f.push_back(make("ports.backend", &P::ports, &PortSettings::backend, T::kString, "mock | http"));
  f.push_back(make("ports.embed_dim", &P::ports, &PortSettings::embed_dim, T::kUint, "embedder output width"));
  f.push_back(make("ports.summarizer_url", &P::ports, &PortSettings::summarizer_url, T::kString, "summarizer endpoint"));
  f.push_back(make("ports.summarizer_model", &P::ports, &PortSettings::summarizer_model, T::kString, "summarizer model"));
  f.push_back(make("ports.summarizer_temperature", &P::ports, &PortSettings::summarizer_temperature, T::kDouble,
                   "summarizer sampling temperature"));
  f.push_back(make("ports.embedder_url", &P::ports, &PortSettings::embedder_url, T::kString, "embedder endpoint"));
  f.push_back(make("ports.embedder_model", &P::ports, &PortSettings::embedder_model, T::kString, "embedder model"));
  f.push_back(make("ports.generator_url", &P::ports, &PortSettings::generator_url, T::kString, "generator endpoint"));
  f.push_back(make("ports.generator_model", &P::ports, &PortSettings::generator_model, T::kString, "generator model"));
  f.push_back(make("ports.judge_url", &P::ports, &PortSettings::judge_url, T::kString, "judge endpoint"));
  f.push_back(make("ports.judge_model", &P::ports, &PortSettings::judge_model, T::kString, "judge model"));
  f.push_back(make("ports.api_key_env", &P::ports, &PortSettings::api_key_env, T::kString,
                   "environment variable holding the endpoint credential"));
  f.push_back(make("ports.timeout_s", &P::ports, &PortSettings::timeout_s, T::kUint, "HTTP timeout in seconds"));
  f.push_back(make("ports.max_retries", &P::ports, &PortSettings::max_retries, T::kInt, "retries per model call"));
  return f;
}

void resolve_path(PipelineConfig& config, const Field& f, const std::filesystem::path& base_dir) {
  if (f.type != FieldType::kPath) return;
  const std::string v = f.get(config);
  if (v.empty()) return;
  const std::filesystem::path p(v);
  if (p.is_relative()) f.set(config, (base_dir / p).lexically_normal().string());
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::kValidation, message);
}

}  // namespace

const std::vector<Field>& fields() {
  static const std::vector<Field> all = build_fields();
  return all;
}

const Field& field(std::string_view name) {
  for (const auto& f : fields()) {
    if (f.name == name) return f;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown config field: " + std::string(name));
}

void set_field(PipelineConfig& config, std::string_view name, std::string_view value) { field(name).set(config, value); }

std::string get_field(const PipelineConfig& config, std::string_view name) { return field(name).get(config); }

PipelineConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorKind::kParse, "config: " + std::string(e.description()) + " at line " +
                                       std::to_string(e.source().begin.line));
  }
  PipelineConfig config;
  for (const auto& [section, node] : root) {
    const auto* table = node.as_table();
    if (table == nullptr) {
      throw Error(ErrorKind::kParse, "config: top-level key '" + std::string(section.str()) + "' must be a [section]");
    }
    for (const auto& [key, value] : *table) {
      const std::string name = std::string(section.str()) + "." + std::string(key.str());
      const Field& f = field(name);
      std::string text;
      switch (f.type) {
        case FieldType::kString:
        case FieldType::kPath:
          if (!value.is_string()) bad_value(name, "non-string", "string");
          text = *value.value<std::string>();
          break;
        case FieldType::kBool:
          if (!value.is_boolean()) bad_value(name, "non-boolean", "boolean");
          text = *value.value<bool>() ? "true" : "false";
          break;
        case FieldType::kInt:
        case FieldType::kUint:
          if (!value.is_integer()) bad_value(name, "non-integer", "integer");
          text = std::to_string(*value.value<std::int64_t>());
          break;
        case FieldType::kDouble:
          if (value.is_integer()) {
            text = std::to_string(*value.value<std::int64_t>());
          } else if (value.is_floating_point()) {
            text = format_double(*value.value<double>());
          } else {
            bad_value(name, "non-number", "number");
          }
          break;
      }
      f.set(config, text);
      resolve_path(config, f, base_dir);
    }
  }
  // Defaults are relative to the config file as well.
  for (const auto& f : fields()) resolve_path(config, f, base_dir);
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::absolute(path).parent_path());
}

void apply_overrides(PipelineConfig& config, const std::map<std::string, std::string>& overrides,
                     const std::filesystem::path& base_dir) {
  for (const auto& [name, value] : overrides) {
    const Field& f = field(name);
    f.set(config, value);
    resolve_path(config, f, base_dir);
  }
}

std::string canonical_text(const PipelineConfig& config, const std::vector<std::string>& prefixes) {
  std::string out;
  for (const auto& f : fields()) {
    if (!f.in_digest) continue;
    bool match = prefixes.empty();
    for (const auto& p : prefixes) match = match || f.name.rfind(p, 0) == 0;
    if (!match) continue;
    std::string value = f.get(config);
    // Files enter by content so digests do not depend on the checkout location.
    if (f.type == FieldType::kPath && std::filesystem::is_regular_file(value)) {
      value = "sha256:" + digest_file(value).strong;
    }
    out += f.name + " = " + nlohmann::json(value).dump() + "\n";
  }
  return out;
}

std::string to_toml(const PipelineConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    const auto dot = f.name.find('.');
    const std::string sec = f.name.substr(0, dot);
    if (sec != section) {
      out += (section.empty() ? "[" : "\n[") + sec + "]\n";
      section = sec;
    }
    const std::string v = f.get(config);
    const bool quoted = f.type == FieldType::kString || f.type == FieldType::kPath;
    out += f.name.substr(dot + 1) + " = " + (quoted ? nlohmann::json(v).dump() : v) + "\n";
  }
  return out;
}

void PipelineConfig::validate() const {
  require(!data.reviews.empty(), "data.reviews must be set");
  require(data.train_fraction > 0.0 && data.train_fraction < 1.0, "data.train_fraction must be in (0, 1)");
  require(!run.dir.empty(), "run.dir must be set");
  require(profiler.arity >= 2, "profiler.arity must be >= 2");
  try {
    const auto mode = profiler::parse_profile_mode(profiler.mode);
    require(mode != profiler::ProfileMode::kRandomSample || profiler.sample_size >= 1,
            "profiler.sample_size must be >= 1");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kValidation) throw;
    throw Error(ErrorKind::kValidation, "profiler.mode: " + std::string(e.what()));
  }
  require(profiler.max_concurrency >= 1, "profiler.max_concurrency must be >= 1");
  require(profiler.input_budget >= 1, "profiler.input_budget must be >= 1");
  require(gcn.d_gcn >= 1 && gcn.hidden >= 1 && gcn.d_llm >= 1, "gcn widths must be >= 1");
  require(gcn.vocab_size >= 2, "gcn.vocab_size must be >= 2");
  require(gcn.max_target_tokens >= 1, "gcn.max_target_tokens must be >= 1");
  require(gcn.learning_rate >= 0.0, "gcn.learning_rate must be >= 0");
  require(gcn.batch_size >= 1, "gcn.batch_size must be >= 1");
  require(gcn.init_stddev > 0.0, "gcn.init_stddev must be > 0");
  require(retrieval.query_type == "latent" || retrieval.query_type == "profile",
          "retrieval.query_type must be latent or profile");
  require(retrieval.top_q >= 1, "retrieval.top_q must be >= 1");
  require(retrieval.embed_batch >= 1, "retrieval.embed_batch must be >= 1");
  require(retrieval.temperature > 0.0, "retrieval.temperature must be > 0");
  require(retrieval.contrastive_form == "as_printed" || retrieval.contrastive_form == "anchor_vs_all",
          "retrieval.contrastive_form must be as_printed or anchor_vs_all");
  require(retrieval.adapter_learning_rate >= 0.0, "retrieval.adapter_learning_rate must be >= 0");
  require(retrieval.adapter_batch >= 2, "retrieval.adapter_batch must be >= 2");
  require(generator.temperature >= 0.0, "generator.temperature must be >= 0");
  require(generator.max_tokens >= 1, "generator.max_tokens must be >= 1");
  require(eval.token_dim >= 1, "eval.token_dim must be >= 1");
  require(ports.backend == "mock" || ports.backend == "http", "ports.backend must be mock or http");
  require(ports.embed_dim >= 1, "ports.embed_dim must be >= 1");
  require(ports.summarizer_temperature >= 0.0, "ports.summarizer_temperature must be >= 0");
  require(ports.max_retries >= 0, "ports.max_retries must be >= 0");
  if (ports.backend == "http") {
    require(!ports.summarizer_url.empty(), "ports.summarizer_url must be set for the http backend");
    require(!ports.embedder_url.empty(), "ports.embedder_url must be set for the http backend");
    require(!generator.enabled || !ports.generator_url.empty(), "ports.generator_url must be set for the http backend");
    require(!eval.judge || !ports.judge_url.empty(), "ports.judge_url must be set for the http backend");
  }
  for (const auto& f : fields()) {
    if (f.type != FieldType::kPath || f.name == "run.dir") continue;
    const std::string p = f.get(*this);
    require(std::filesystem::is_regular_file(p), f.name + ": no such file: " + p);
  }
}

}  // namespace rexha::pipeline
