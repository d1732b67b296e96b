#include "rexha/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "rexha/corpus.hpp"
#include "rexha/digest.hpp"
#include "rexha/error.hpp"
#include "rexha/graph_encoder.hpp"
#include "rexha/http_ports.hpp"
#include "rexha/mocks.hpp"
#include "rexha/text.hpp"

namespace rexha::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

Ports OwnedPorts::view() const {
  return Ports{summarizer.get(), embedder.get(), generator.get(), token_embedder.get(), judge.get()};
}

OwnedPorts make_ports(const PipelineConfig& config) {
  OwnedPorts p;
  const auto& ports = config.ports;
  if (ports.backend == "http") {
    auto endpoint = [&ports](const std::string& url, const std::string& model) {
      return http::Endpoint{url, model, std::chrono::seconds(ports.timeout_s), ports.api_key_env};
    };
    p.summarizer = std::make_unique<http::HttpSummarizer>(endpoint(ports.summarizer_url, ports.summarizer_model),
                                                          ports.summarizer_temperature, config.profiler.input_budget);
    p.embedder = std::make_unique<http::HttpEmbedder>(endpoint(ports.embedder_url, ports.embedder_model),
                                                      ports.embed_dim);
    if (!ports.generator_url.empty()) {
      p.generator = std::make_unique<http::HttpGenerator>(endpoint(ports.generator_url, ports.generator_model));
    }
    if (!ports.judge_url.empty()) {
      p.judge = std::make_unique<http::HttpJudge>(endpoint(ports.judge_url, ports.judge_model), 0.0);
    }
  } else {
    p.summarizer = std::make_unique<mock::FirstSentenceSummarizer>(config.profiler.input_budget);
    p.embedder = std::make_unique<mock::HashEmbedder>(ports.embed_dim);
    p.generator = std::make_unique<mock::EchoGenerator>();
    p.judge = std::make_unique<mock::LengthRatioJudge>();
  }
  // BERTscore token encoder stays in-process for both backends.
  p.token_embedder = std::make_unique<mock::HashTokenEmbedder>(config.eval.token_dim);
  return p;
}

namespace {

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::kIngest, "ingest"},
    {Stage::kSplit, "split"},
    {Stage::kTrainGcn, "train-gcn"},
    {Stage::kBuildProfiles, "build-profiles"},
    {Stage::kEmbed, "embed"},
    {Stage::kFinetuneAdapter, "finetune-adapter"},
    {Stage::kRetrieve, "retrieve"},
    {Stage::kAssemble, "assemble"},
    {Stage::kGenerate, "generate"},
    {Stage::kEvaluate, "evaluate"},
};

}  // namespace

std::string_view to_string(Stage stage) noexcept {
  for (const auto& [s, n] : kStageNames) {
    if (s == stage) return n;
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  for (const auto& [s, n] : kStageNames) {
    if (n == name) return s;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown stage: " + std::string(name));
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = [] {
    std::vector<Stage> v;
    for (const auto& [s, n] : kStageNames) v.push_back(s);
    return v;
  }();
  return stages;
}

std::vector<std::uint32_t> tokenize_target(std::string_view text, std::size_t vocab_size, std::size_t max_tokens) {
  if (vocab_size == 0 || max_tokens == 0) throw Error(ErrorKind::kInvalidArgument, "tokenize_target: empty vocabulary");
  std::vector<std::uint32_t> ids;
  for (const auto& w : text::words(text)) {
    if (ids.size() == max_tokens) break;
    ids.push_back(static_cast<std::uint32_t>(fnv1a64(w) % vocab_size));
  }
  if (ids.empty()) ids.push_back(0);
  return ids;
}

// ---------------------------------------------------------------------------

const StageRecord* RunManifest::find(std::string_view stage) const {
  for (const auto& s : stages) {
    if (s.name == stage) return &s;
  }
  return nullptr;
}

std::string RunManifest::to_json() const {
  json j;
  j["config_digest"] = config_digest;
  j["seeds"] = seeds;
  j["threads"] = threads;
  j["ports"] = ports;
  json st = json::array();
  for (const auto& s : stages) {
    st.push_back({{"name", s.name}, {"status", s.status}, {"key", s.key}, {"outputs", s.outputs},
                  {"ms", s.ms}, {"note", s.note}});
  }
  j["stages"] = std::move(st);
  j["artifacts"] = artifacts;
  j["error"] = error.empty() ? json(nullptr) : json(error);
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    RunManifest m;
    m.config_digest = j.at("config_digest").get<std::string>();
    m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
    m.threads = j.at("threads").get<std::map<std::string, std::size_t>>();
    m.ports = j.at("ports").get<std::map<std::string, std::string>>();
    for (const auto& s : j.at("stages")) {
      m.stages.push_back({s.at("name").get<std::string>(), s.at("status").get<std::string>(),
                          s.at("key").get<std::string>(), s.at("outputs").get<std::map<std::string, std::string>>(),
                          s.at("ms").get<double>(), s.at("note").get<std::string>()});
    }
    m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    if (!j.at("error").is_null()) m.error = j.at("error").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("bad manifest: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

namespace {

using ProfileMap = std::map<std::pair<std::string, std::string>, profiler::Profile>;  // (kind, id)

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!text::is_blank(line)) lines.push_back(line);
  }
  return lines;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  text::write_file(path.string(), out);
}

std::vector<profiler::Opinion> read_opinions(const fs::path& path) {
  std::vector<profiler::Opinion> out;
  for (const auto& l : read_lines(path)) out.push_back(profiler::opinion_from_json(l));
  return out;
}

ProfileMap read_profiles(const fs::path& path) {
  ProfileMap out;
  for (const auto& l : read_lines(path)) {
    auto p = profiler::profile_from_json(l);
    out.emplace(std::make_pair(std::string(profiler::to_string(p.kind)), p.subject_id), std::move(p));
  }
  return out;
}

const profiler::Profile& lookup(const ProfileMap& profiles, profiler::SubjectKind kind, const std::string& id) {
  const auto it = profiles.find({std::string(profiler::to_string(kind)), id});
  if (it == profiles.end()) {
    throw Error(ErrorKind::kNotFound, "no " + std::string(profiler::to_string(kind)) + " profile for " + id);
  }
  return it->second;
}

// Test pairs whose user and item both occur in the training partition.
std::vector<const corpus::Review*> targets(const corpus::Dataset& train, const corpus::Dataset& test) {
  std::vector<const corpus::Review*> out;
  for (const auto& r : test.reviews()) {
    if (train.has_user(r.user_id) && train.has_item(r.item_id)) out.push_back(&r);
  }
  return out;
}

retrieval::VectorIndex load_index(const fs::path& cache_path, const std::vector<profiler::Opinion>& opinions) {
  std::map<std::string, retrieval::RowMeta> meta;
  for (const auto& o : opinions) meta[std::to_string(o.review_id)] = {o.user_id, o.item_id};
  const auto cache = retrieval::read_embedding_cache(cache_path);
  return retrieval::index_from_cache(cache, [&meta](const std::string& id) {
    const auto it = meta.find(id);
    if (it == meta.end()) throw Error(ErrorKind::kValidation, "embedding cache row " + id + " has no opinion");
    return it->second;
  });
}

struct InputSpec {
  std::vector<const char*> artifacts;
  std::vector<std::string> settings;
};

}  // namespace

struct Runner::StageResult {
  std::vector<std::string> outputs;
  std::string note;
};

Runner::Runner(PipelineConfig config, Ports ports, RunOptions options)
    : config_(std::move(config)), ports_(ports), options_(std::move(options)), dir_(config_.run.dir) {
  config_.validate();
  if (ports_.summarizer == nullptr || ports_.embedder == nullptr || ports_.token_embedder == nullptr) {
    throw Error(ErrorKind::kInvalidArgument, "summarizer, embedder and token embedder ports are required");
  }
  if (config_.generator.enabled && ports_.generator == nullptr) {
    throw Error(ErrorKind::kInvalidArgument, "generator.enabled needs a generator port");
  }
  fs::create_directories(dir_ / "cache");

  const std::string digest = digest_bytes(canonical_text(config_)).str();
  if (fs::exists(dir_ / artifact::kManifest)) {
    try {
      auto old = RunManifest::from_json(text::read_file((dir_ / artifact::kManifest).string()));
      if (old.config_digest == digest) manifest_.stages = std::move(old.stages);
    } catch (const Error&) {
      // Unreadable manifest: start a fresh one.
    }
  }
  manifest_.config_digest = digest;
  manifest_.seeds = {{"data.split_seed", config_.data.split_seed},
                     {"profiler.seed", config_.profiler.seed},
                     {"gcn.seed", config_.gcn.seed},
                     {"retrieval.adapter_seed", config_.retrieval.adapter_seed}};
  manifest_.threads = {{"profiler.max_concurrency", config_.profiler.max_concurrency},
                       {"gcn.propagation", 1},
                       {"retrieval.search", 1}};
  manifest_.ports = {{"summarizer", ports_.summarizer->identity()},
                     {"embedder", ports_.embedder->identity()},
                     {"generator", ports_.generator != nullptr ? ports_.generator->identity() : "none"},
                     {"token_embedder", ports_.token_embedder->identity()},
                     {"judge", ports_.judge != nullptr ? ports_.judge->identity() : "none"}};
}

void Runner::log(const std::string& line) const {
  if (options_.log) options_.log(line);
}

bool Runner::skipped(Stage stage, std::string* why) const {
  switch (stage) {
    case Stage::kFinetuneAdapter:
      if (config_.retrieval.query_type != "profile") {
        *why = "retrieval.query_type is latent";
        return true;
      }
      return false;
    case Stage::kGenerate:
    case Stage::kEvaluate:
      if (!config_.generator.enabled) {
        *why = "generator.enabled is false";
        return true;
      }
      return false;
    default:
      return false;
  }
}

std::string Runner::stage_key(Stage stage) const {
  const bool profile = config_.retrieval.query_type == "profile";
  InputSpec in;
  std::vector<std::string> identities;
  using namespace artifact;
  switch (stage) {
    case Stage::kIngest:
      in.settings = {"data.reviews", "data.allow_duplicates"};
      break;
    case Stage::kSplit:
      in = {{kReviews}, {"data.train_fraction", "data.split_seed"}};
      break;
    case Stage::kTrainGcn:
      in = {{kTrain}, {"gcn."}};
      break;
    case Stage::kBuildProfiles:
      in = {{kTrain}, {"profiler."}};
      identities = {ports_.summarizer->identity()};
      break;
    case Stage::kEmbed:
      in = {{kOpinions}, {"ports.embed_dim"}};
      identities = {ports_.embedder->identity()};
      break;
    case Stage::kFinetuneAdapter:
      in = {{kOpinions, kProfiles},
            {"ports.embed_dim", "retrieval.temperature", "retrieval.contrastive_form", "retrieval.adapter_"}};
      identities = {ports_.embedder->identity()};
      break;
    case Stage::kRetrieve:
      in = {{kEmbeddings, kOpinions, kTrain, kTest}, {"retrieval.query_type", "retrieval.top_q"}};
      if (profile) {
        in.artifacts.push_back(kProfiles);
        in.artifacts.push_back(kAdapter);
        identities = {ports_.embedder->identity()};
      }
      break;
    case Stage::kAssemble:
      in = {{kRetrieved, kProfiles, kOpinions, kCheckpoint, kTrain, kTest}, {"generator.prompt_template"}};
      break;
    case Stage::kGenerate:
      in = {{kPrompts}, {"generator.temperature", "generator.max_tokens"}};
      identities = {ports_.generator->identity()};
      break;
    case Stage::kEvaluate:
      in = {{kTest, kCandidates}, {"eval."}};
      identities = {ports_.token_embedder->identity(), ports_.judge != nullptr ? ports_.judge->identity() : "none"};
      break;
  }
  std::string material = "stage=" + std::string(to_string(stage)) + "\n";
  for (const char* a : in.artifacts) {
    const fs::path p = dir_ / a;
    if (!fs::is_regular_file(p)) {
      throw Error(ErrorKind::kNotFound, std::string("missing input artifact ") + a + " in " + dir_.string());
    }
    material += std::string("input ") + a + " = " + digest_file(p).str() + "\n";
  }
  material += canonical_text(config_, in.settings);
  for (const auto& id : identities) material += "port = " + id + "\n";
  return digest_bytes(material).str();
}

const StageRecord& Runner::run_stage(Stage stage) {
  const std::string name(to_string(stage));
  StageRecord rec;
  rec.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::string why;
    if (skipped(stage, &why)) {
      rec.status = "skipped";
      rec.note = why;
      log(name + ": skipped (" + why + ")");
    } else {
      rec.key = stage_key(stage);
      const fs::path cache_file = dir_ / "cache" / (name + ".json");
      bool hit = false;
      if (fs::exists(cache_file)) {
        try {
          const json c = json::parse(text::read_file(cache_file.string()));
          if (c.at("key").get<std::string>() == rec.key) {
            hit = true;
            for (const auto& [file, digest] : c.at("outputs").items()) {
              const fs::path p = dir_ / file;
              if (!fs::is_regular_file(p) || digest_file(p).str() != digest.get<std::string>()) {
                hit = false;
                break;
              }
              rec.outputs[file] = digest.get<std::string>();
            }
            if (hit) rec.note = c.value("note", "");
          }
        } catch (const std::exception&) {
          hit = false;
        }
      }
      if (hit) {
        rec.status = "cached";
      } else {
        rec.outputs.clear();
        StageResult r = execute(stage);
        for (const auto& file : r.outputs) rec.outputs[file] = digest_file(dir_ / file).str();
        rec.status = "ran";
        rec.note = r.note;
        json c{{"key", rec.key}, {"outputs", rec.outputs}, {"note", rec.note}};
        text::write_file(cache_file.string(), c.dump(2) + "\n");
      }
    }
  } catch (const Error& e) {
    rec.status = "failed";
    rec.note = e.what();
    manifest_.error = "stage " + name + ": " + e.what();
    auto it = std::find_if(manifest_.stages.begin(), manifest_.stages.end(),
                           [&](const StageRecord& s) { return s.name == name; });
    if (it != manifest_.stages.end()) manifest_.stages.erase(it);
    manifest_.stages.push_back(rec);
    write_manifest();
    throw Error(e.kind(), manifest_.error);
  }
  rec.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (rec.status != "skipped") log(name + ": " + rec.status + " in " + std::to_string(static_cast<long long>(rec.ms)) + " ms" +
                                   (rec.note.empty() ? "" : " (" + rec.note + ")"));

  manifest_.error.clear();
  auto it = std::find_if(manifest_.stages.begin(), manifest_.stages.end(),
                         [&](const StageRecord& s) { return s.name == name; });
  if (it != manifest_.stages.end()) {
    *it = rec;
  } else {
    manifest_.stages.push_back(rec);
  }
  write_manifest();
  return *std::find_if(manifest_.stages.begin(), manifest_.stages.end(),
                       [&](const StageRecord& s) { return s.name == name; });
}

void Runner::write_manifest() {
  std::sort(manifest_.stages.begin(), manifest_.stages.end(), [](const StageRecord& a, const StageRecord& b) {
    return parse_stage(a.name) < parse_stage(b.name);
  });
  manifest_.artifacts.clear();
  for (const auto& s : manifest_.stages) {
    for (const auto& [file, digest] : s.outputs) manifest_.artifacts[file] = digest;
  }
  text::write_file((dir_ / artifact::kManifest).string(), manifest_.to_json());
}

const RunManifest& Runner::run_all() {
  for (Stage s : all_stages()) run_stage(s);
  return manifest_;
}

Runner::StageResult Runner::execute(Stage stage) {
  using namespace artifact;
  const auto at = [this](const char* name) { return dir_ / name; };
  const RetryPolicy retry{config_.ports.max_retries, std::chrono::milliseconds{200}, 2.0,
                          std::chrono::milliseconds{5000}};
  const retrieval::EmbedOptions embed_opts{config_.retrieval.embed_batch, retry, default_sleep};
  StageResult out;

  switch (stage) {
    case Stage::kIngest: {
      corpus::LoadOptions lo;
      lo.duplicates = config_.data.allow_duplicates ? corpus::DuplicatePolicy::kKeepLatest
                                                    : corpus::DuplicatePolicy::kReject;
      const auto ds = corpus::load_reviews(config_.data.reviews, lo);
      corpus::write_reviews(ds, at(kReviews));
      out.outputs = {kReviews};
      out.note = std::to_string(ds.size()) + " reviews, " + std::to_string(ds.user_index().size()) + " users, " +
                 std::to_string(ds.item_index().size()) + " items";
      break;
    }
    case Stage::kSplit: {
      const auto ds = corpus::load_reviews(at(kReviews));
      const corpus::SplitSpec spec{config_.data.train_fraction, config_.data.split_seed};
      const auto parts = corpus::split(ds, spec);
      text::write_file(at(kSplit).string(), corpus::split_manifest_json(spec, parts));
      corpus::write_reviews(parts.train, at(kTrain));
      corpus::write_reviews(parts.test, at(kTest));
      out.outputs = {kSplit, kTrain, kTest};
      out.note = std::to_string(parts.train.size()) + " train, " + std::to_string(parts.test.size()) + " test";
      break;
    }
    case Stage::kTrainGcn: {
      const auto train = corpus::load_reviews(at(kTrain));
      const auto graph = corpus::build_interaction_graph(train);
      const auto& g = config_.gcn;
      std::vector<gcn::TrainBatch> batches;
      for (const auto& r : train.reviews()) {
        if (batches.empty() || batches.back().pairs.size() == g.batch_size) batches.emplace_back();
        const std::string& target = r.explanation ? *r.explanation : r.text;
        batches.back().pairs.push_back({*graph.user_ordinal(r.user_id), *graph.item_ordinal(r.item_id),
                                        tokenize_target(target, g.vocab_size, g.max_target_tokens)});
      }
      const gcn::LinearSoftmaxHead head(g.d_llm, g.vocab_size, g.seed ^ 0x5eedULL);
      gcn::TrainConfig tc;
      tc.d_gcn = g.d_gcn;
      tc.hidden = g.hidden;
      tc.layers = g.layers;
      tc.learning_rate = g.learning_rate;
      tc.steps = g.steps;
      tc.seed = g.seed;
      tc.init_stddev = g.init_stddev;
      tc.nll.per_token_normalize = g.per_token_normalize;
      const auto res = gcn::train_adaptor(graph, head, batches, tc);
      gcn::write_checkpoint(at(kCheckpoint), res.table, res.net);
      const json log{{"users", graph.num_users()},     {"items", graph.num_items()},
                     {"edges", graph.num_edges()},     {"initial_loss", res.initial_loss},
                     {"final_loss", res.final_loss},   {"step_losses", res.step_losses}};
      text::write_file(at(kGcnLog).string(), log.dump(2) + "\n");
      out.outputs = {kCheckpoint, kGcnLog};
      char buf[96];
      std::snprintf(buf, sizeof buf, "loss %.6f -> %.6f", res.initial_loss, res.final_loss);
      out.note = buf;
      break;
    }
    case Stage::kBuildProfiles: {
      const auto train = corpus::load_reviews(at(kTrain));
      const auto& p = config_.profiler;
      profiler::CallOptions call;
      call.retry = retry;
      const std::string opinion_instr = text::read_file(p.opinion_template);
      const auto opinions =
          profiler::summarize_opinions(train, *ports_.summarizer, opinion_instr, p.max_concurrency, call);
      std::vector<std::string> lines;
      for (const auto& o : opinions) lines.push_back(profiler::opinion_to_json(o));
      write_lines(at(kOpinions), lines);

      profiler::ProfilerConfig pc;
      pc.arity = p.arity;
      pc.seed = p.seed;
      pc.mode = profiler::parse_profile_mode(p.mode);
      pc.sample_size = p.sample_size;
      pc.max_concurrency = p.max_concurrency;
      pc.retry = retry;
      const profiler::Instructions instr{text::read_file(p.user_template), text::read_file(p.item_template)};

      std::uint64_t calls = opinions.size();
      std::vector<profiler::Profile> items;
      std::map<std::string, std::string, std::less<>> item_texts;
      for (const auto& [item, pos] : train.item_index()) {
        items.push_back(profiler::build_profile(train, profiler::SubjectKind::kItem, item, *ports_.summarizer, pc, instr));
        item_texts[item] = items.back().text;
        calls += items.back().calls;
      }
      lines.clear();
      for (const auto& [user, pos] : train.user_index()) {
        const auto prof = profiler::build_profile(train, profiler::SubjectKind::kUser, user, *ports_.summarizer, pc,
                                                  instr, p.include_item_profiles ? &item_texts : nullptr);
        calls += prof.calls;
        lines.push_back(profiler::profile_to_json(prof));
      }
      for (const auto& prof : items) lines.push_back(profiler::profile_to_json(prof));
      write_lines(at(kProfiles), lines);
      out.outputs = {kOpinions, kProfiles};
      out.note = std::to_string(calls) + " summarizer calls";
      break;
    }
    case Stage::kEmbed: {
      const auto opinions = read_opinions(at(kOpinions));
      const auto index = retrieval::embed_opinions(*ports_.embedder, opinions, embed_opts);
      retrieval::write_embedding_cache(at(kEmbeddings), index);
      out.outputs = {kEmbeddings};
      out.note = std::to_string(index.size()) + " rows x " + std::to_string(index.dimension());
      break;
    }
    case Stage::kFinetuneAdapter: {
      const auto opinions = read_opinions(at(kOpinions));
      const auto profiles = read_profiles(at(kProfiles));
      std::vector<std::pair<std::string, std::string>> pairs;
      for (const auto& o : opinions) {
        pairs.emplace_back(retrieval::profile_query_text(lookup(profiles, profiler::SubjectKind::kUser, o.user_id),
                                                         lookup(profiles, profiler::SubjectKind::kItem, o.item_id)),
                           o.text);
      }
      const auto& r = config_.retrieval;
      retrieval::ContrastiveConfig cc;
      cc.temperature = r.temperature;
      cc.batch_size = r.adapter_batch;
      cc.learning_rate = r.adapter_learning_rate;
      cc.steps = r.adapter_steps;
      cc.seed = r.adapter_seed;
      cc.form = retrieval::parse_contrastive_form(r.contrastive_form);
      const auto fit = retrieval::fit_adapter(pairs, *ports_.embedder, cc, embed_opts);
      text::write_file(at(kAdapter).string(), fit.params.to_json() + "\n");
      const json log{{"pairs", pairs.size()},
                     {"form", std::string(retrieval::to_string(cc.form))},
                     {"initial_loss", fit.initial_loss},
                     {"final_loss", fit.final_loss},
                     {"step_losses", fit.step_losses}};
      text::write_file(at(kAdapterLog).string(), log.dump(2) + "\n");
      out.outputs = {kAdapter, kAdapterLog};
      char buf[96];
      std::snprintf(buf, sizeof buf, "loss %.6f -> %.6f", fit.initial_loss, fit.final_loss);
      out.note = buf;
      break;
    }
    case Stage::kRetrieve: {
      const auto train = corpus::load_reviews(at(kTrain));
      const auto test = corpus::load_reviews(at(kTest));
      const auto opinions = read_opinions(at(kOpinions));
      const auto base = load_index(at(kEmbeddings), opinions);
      const bool profile = config_.retrieval.query_type == "profile";

      std::vector<std::string> lines;
      const auto tgts = targets(train, test);
      if (profile) {
        const auto profiles = read_profiles(at(kProfiles));
        const auto adapter = retrieval::AdapterParams::from_json(text::read_file(at(kAdapter).string()));
        const auto adapted = retrieval::adapt_index(base, adapter);
        for (const auto* t : tgts) {
          const auto q = retrieval::profile_query(adapter, *ports_.embedder,
                                                  lookup(profiles, profiler::SubjectKind::kUser, t->user_id),
                                                  lookup(profiles, profiler::SubjectKind::kItem, t->item_id), embed_opts);
          const auto res = retrieval::retrieve_top_q(adapted, q, config_.retrieval.top_q, {{t->user_id, t->item_id}},
                                                     t->user_id + "|" + t->item_id);
          json hits = json::array();
          for (const auto& h : res.hits) hits.push_back({{"id", h.id}, {"score", h.score}});
          lines.push_back(json{{"user_id", t->user_id}, {"item_id", t->item_id}, {"query_type", "profile"},
                               {"hits", hits}}.dump());
        }
      } else {
        std::map<std::string, std::vector<retrieval::UnitVector>> by_user, by_item;
        for (std::size_t r = 0; r < base.size(); ++r) {
          by_user[base.meta(r).user_id].push_back(base.unit_row(r));
          by_item[base.meta(r).item_id].push_back(base.unit_row(r));
        }
        for (const auto* t : tgts) {
          const auto q = retrieval::latent_query(by_user[t->user_id], by_item[t->item_id]);
          const auto res = retrieval::retrieve_top_q(base, q, config_.retrieval.top_q, {{t->user_id, t->item_id}},
                                                     t->user_id + "|" + t->item_id);
          json hits = json::array();
          for (const auto& h : res.hits) hits.push_back({{"id", h.id}, {"score", h.score}});
          lines.push_back(json{{"user_id", t->user_id}, {"item_id", t->item_id}, {"query_type", "latent"},
                               {"hits", hits}}.dump());
        }
      }
      write_lines(at(kRetrieved), lines);
      out.outputs = {kRetrieved};
      out.note = std::to_string(tgts.size()) + " queries, " + std::to_string(test.size() - tgts.size()) +
                 " cold-start test pairs skipped";
      break;
    }
    case Stage::kAssemble: {
      const auto train = corpus::load_reviews(at(kTrain));
      const auto test = corpus::load_reviews(at(kTest));
      const auto profiles = read_profiles(at(kProfiles));
      std::map<std::string, std::string> opinion_text;
      for (const auto& o : read_opinions(at(kOpinions))) opinion_text[std::to_string(o.review_id)] = o.text;
      const auto graph = corpus::build_interaction_graph(train);
      const auto ckpt = gcn::read_checkpoint(at(kCheckpoint));
      const auto finals = gcn::final_embeddings(graph, ckpt.table);
      const std::string tmpl = text::read_file(config_.generator.prompt_template);

      std::map<std::pair<std::string, std::string>, std::string> truth;
      for (const auto& r : test.reviews()) {
        if (r.explanation && !text::is_blank(*r.explanation)) truth[{r.user_id, r.item_id}] = *r.explanation;
      }

      std::vector<std::string> lines;
      std::size_t checked = 0;
      for (const auto& line : read_lines(at(kRetrieved))) {
        const json j = json::parse(line);
        const auto user = j.at("user_id").get<std::string>();
        const auto item = j.at("item_id").get<std::string>();
        std::vector<prompt::RetrievedOpinion> hits;
        for (const auto& h : j.at("hits")) {
          const auto id = h.at("id").get<std::string>();
          const auto it = opinion_text.find(id);
          if (it == opinion_text.end()) throw Error(ErrorKind::kNotFound, "retrieved opinion " + id + " not found");
          hits.push_back({id, it->second, h.at("score").get<double>()});
        }
        const auto uo = graph.user_ordinal(user);
        const auto io = graph.item_ordinal(item);
        if (!uo || !io) throw Error(ErrorKind::kNotFound, "no graph node for (" + user + ", " + item + ")");
        const gcn::Vector ue = gcn::project(ckpt.net, finals.users.row(*uo).transpose());
        const gcn::Vector ie = gcn::project(ckpt.net, finals.items.row(*io).transpose());
        auto bundle = prompt::assemble_prompt(lookup(profiles, profiler::SubjectKind::kUser, user),
                                              lookup(profiles, profiler::SubjectKind::kItem, item), hits, ue, ie, tmpl);
        if (const auto t = truth.find({user, item}); t != truth.end()) {
          if (bundle.text.find(t->second) != std::string::npos) {
            throw Error(ErrorKind::kValidation,
                        "leakage: prompt for (" + user + ", " + item + ") contains its ground-truth explanation");
          }
          ++checked;
        }
        lines.push_back(bundle.to_json());
      }
      write_lines(at(kPrompts), lines);
      out.outputs = {kPrompts};
      out.note = std::to_string(lines.size()) + " prompts, leakage check passed on " + std::to_string(checked);
      break;
    }
    case Stage::kGenerate: {
      const prompt::GenerationSettings gs{config_.generator.temperature, config_.generator.max_tokens};
      std::vector<std::string> lines;
      double total_ms = 0.0;
      for (const auto& line : read_lines(at(kPrompts))) {
        const auto bundle = prompt::PromptBundle::from_json(line);
        const auto g = prompt::generate(*ports_.generator, bundle, gs, retry);
        total_ms += g.latency_ms;
        lines.push_back(eval::explanation_to_json({bundle.user_id, bundle.item_id, g.text}));
      }
      write_lines(at(kCandidates), lines);
      out.outputs = {kCandidates};
      char buf[96];
      std::snprintf(buf, sizeof buf, "%zu explanations, mean latency %.3f ms", lines.size(),
                    lines.empty() ? 0.0 : total_ms / static_cast<double>(lines.size()));
      out.note = buf;
      break;
    }
    case Stage::kEvaluate: {
      const auto cands = eval::read_explanations(at(kCandidates).string());
      std::set<std::pair<std::string, std::string>> have;
      for (const auto& c : cands) have.insert({c.user_id, c.item_id});
      std::vector<eval::ExplanationRecord> refs;
      for (const auto& r : eval::read_explanations(at(kTest).string())) {
        if (have.count({r.user_id, r.item_id}) != 0) refs.push_back(r);
      }
      if (refs.empty()) throw Error(ErrorKind::kValidation, "no test pair with both a reference and a candidate");
      const auto items = eval::match_explanations(refs, cands);
      eval::EvaluateOptions eo;
      eo.bert.standard_orientation = config_.eval.standard_orientation;
      eo.bert.clip = config_.eval.clip;
      eo.judge.retry = retry;
      eval::Judge* judge = config_.eval.judge ? ports_.judge : nullptr;
      if (judge != nullptr) eo.judge_instruction = text::read_file(config_.eval.judge_template);
      const auto report = eval::evaluate(items, *ports_.token_embedder, judge, eo);
      text::write_file(at(kReport).string(), report.to_json());
      out.outputs = {kReport};
      char buf[128];
      std::snprintf(buf, sizeof buf, "n=%zu bert_f1 %.4f +- %.4f", report.n, report.bert_f1.mean, report.bert_f1.std);
      out.note = buf;
      break;
    }
  }
  return out;
}

RunManifest run_pipeline(const PipelineConfig& config, Ports ports, RunOptions options) {
  Runner runner(config, ports, std::move(options));
  return runner.run_all();
}

}  // namespace rexha::pipeline
