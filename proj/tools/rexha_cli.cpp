// rexha command line: pipeline stages, standalone evaluation and the
// retrieval latency benchmark.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rexha/config.hpp"
#include "rexha/error.hpp"
#include "rexha/evalkit.hpp"
#include "rexha/pipeline.hpp"
#include "rexha/retrieval.hpp"
#include "rexha/text.hpp"

namespace fs = std::filesystem;
using namespace rexha;

namespace {

struct StageCommand {
  CLI::App* app = nullptr;
  pipeline::Stage stage{};
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

// --section.key flags for every registry field, stored as text and applied
// on top of the file.
void add_config_flags(CLI::App* app, std::string* config_path, std::map<std::string, std::string>* overrides,
                      bool config_required) {
  auto* opt = app->add_option("--config", *config_path, "TOML config file");
  if (config_required) opt->required();
  for (const auto& f : pipeline::fields()) {
    app->add_option_function<std::string>(
           "--" + f.name, [overrides, name = f.name](const std::string& v) { (*overrides)[name] = v; }, f.help)
        ->group("Config overrides");
  }
}

pipeline::PipelineConfig resolve_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
  pipeline::PipelineConfig cfg = path.empty() ? pipeline::PipelineConfig{} : pipeline::load_config(path);
  pipeline::apply_overrides(cfg, overrides, fs::current_path());
  return cfg;
}

void log_line(std::string_view line) { std::cerr << "[rexha] " << line << "\n"; }

int run_stage_command(const StageCommand& cmd, const std::optional<std::string>& checkpoint_out) {
  const auto cfg = resolve_config(cmd.config_path, cmd.overrides);
  const auto owned = pipeline::make_ports(cfg);
  pipeline::Runner runner(cfg, owned.view(), {log_line});
  const auto& rec = runner.run_stage(cmd.stage);
  std::cout << rec.name << ": " << rec.status << (rec.note.empty() ? "" : " (" + rec.note + ")") << "\n";
  if (checkpoint_out && rec.status != "skipped") {
    fs::copy_file(runner.dir() / pipeline::artifact::kCheckpoint, *checkpoint_out,
                  fs::copy_options::overwrite_existing);
    std::cout << "checkpoint written to " << *checkpoint_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rexha: hierarchical-aggregation profiles, review retrieval and explanation prompts"};
  app.require_subcommand(1);

  std::vector<StageCommand> stages;
  const std::pair<pipeline::Stage, const char*> stage_help[] = {
      {pipeline::Stage::kIngest, "Load and validate the review corpus into the run directory"},
      {pipeline::Stage::kSplit, "Split reviews into train and test partitions"},
      {pipeline::Stage::kTrainGcn, "Train graph embeddings and the projection network"},
      {pipeline::Stage::kBuildProfiles, "Summarize opinions and build user/item profiles"},
      {pipeline::Stage::kEmbed, "Embed opinions into the vector index cache"},
      {pipeline::Stage::kFinetuneAdapter, "Fit the contrastive query adapter (profile queries)"},
      {pipeline::Stage::kRetrieve, "Retrieve top-q opinions for every test pair"},
      {pipeline::Stage::kAssemble, "Render generation prompts with embedding sidecars"},
      {pipeline::Stage::kGenerate, "Call the generator on every prompt"},
  };
  stages.reserve(std::size(stage_help) + 1);
  for (const auto& [stage, help] : stage_help) {
    StageCommand c;
    c.stage = stage;
    c.app = app.add_subcommand(std::string(pipeline::to_string(stage)), help);
    stages.push_back(std::move(c));
    add_config_flags(stages.back().app, &stages.back().config_path, &stages.back().overrides, true);
  }

  std::string checkpoint_out;
  auto* train_cmd = stages[2].app;
  train_cmd->add_option("--out", checkpoint_out, "Copy the trained checkpoint to this path");

  auto* retrieve_cmd = stages[6].app;
  auto* retrieve_overrides = &stages[6].overrides;
  retrieve_cmd
      ->add_option_function<std::string>(
          "--query-type", [retrieve_overrides](const std::string& v) { (*retrieve_overrides)["retrieval.query_type"] = v; },
          "latent | profile")
      ->check(CLI::IsMember({"latent", "profile"}));
  retrieve_cmd->add_option_function<std::size_t>(
      "--top-q", [retrieve_overrides](std::size_t v) { (*retrieve_overrides)["retrieval.top_q"] = std::to_string(v); },
      "Opinions retrieved per pair");

  // evaluate: standalone with --refs/--cands/--report, else the pipeline stage.
  StageCommand eval_cmd;
  eval_cmd.stage = pipeline::Stage::kEvaluate;
  eval_cmd.app = app.add_subcommand("evaluate", "Score candidate explanations against references");
  add_config_flags(eval_cmd.app, &eval_cmd.config_path, &eval_cmd.overrides, false);
  std::string refs, cands, report_path;
  eval_cmd.app->add_option("--refs", refs, "Reference explanations (JSON-lines)")->check(CLI::ExistingFile);
  eval_cmd.app->add_option("--cands", cands, "Candidate explanations (JSON-lines)")->check(CLI::ExistingFile);
  eval_cmd.app->add_option("--report", report_path, "Report output path");

  auto* bench = app.add_subcommand("bench-retrieval", "Brute-force top-q latency on a random unit-vector index");
  std::size_t rows = 100000, dim = 768, queries = 100, top_q = 8;
  std::uint64_t seed = 1;
  std::string bench_out;
  bench->add_option("--rows", rows, "Index rows")->capture_default_str();
  bench->add_option("--dim", dim, "Vector width")->capture_default_str();
  bench->add_option("--queries", queries, "Timed queries")->capture_default_str();
  bench->add_option("--top-q", top_q, "Hits per query")->capture_default_str();
  bench->add_option("--seed", seed, "RNG seed")->capture_default_str();
  bench->add_option("--out", bench_out, "Also write the JSON report here");

  StageCommand run_cmd;
  run_cmd.app = app.add_subcommand("run", "Run every stage, reusing cached stage outputs");
  add_config_flags(run_cmd.app, &run_cmd.config_path, &run_cmd.overrides, true);

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& c : stages) {
      if (c.app->parsed()) {
        return run_stage_command(c, c.app == train_cmd && !checkpoint_out.empty()
                                        ? std::optional<std::string>(checkpoint_out)
                                        : std::nullopt);
      }
    }

    if (eval_cmd.app->parsed()) {
      const bool standalone = !refs.empty() || !cands.empty() || !report_path.empty();
      if (!standalone) return run_stage_command(eval_cmd, std::nullopt);
      if (refs.empty() || cands.empty() || report_path.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "evaluate needs all of --refs, --cands and --report");
      }
      const auto cfg = resolve_config(eval_cmd.config_path, eval_cmd.overrides);
      const auto owned = pipeline::make_ports(cfg);
      const auto items = eval::match_explanations(eval::read_explanations(refs), eval::read_explanations(cands));
      eval::EvaluateOptions eo;
      eo.bert.standard_orientation = cfg.eval.standard_orientation;
      eo.bert.clip = cfg.eval.clip;
      eo.judge.retry.max_retries = cfg.ports.max_retries;
      eval::Judge* judge = cfg.eval.judge ? owned.judge.get() : nullptr;
      if (judge != nullptr && fs::is_regular_file(cfg.eval.judge_template)) {
        eo.judge_instruction = text::read_file(cfg.eval.judge_template);
      }
      const auto report = eval::evaluate(items, *owned.token_embedder, judge, eo);
      text::write_file(report_path, report.to_json());
      std::printf("n=%zu bert_p %.4f bert_r %.4f bert_f1 %.4f\n", report.n, report.bert_p.mean, report.bert_r.mean,
                  report.bert_f1.mean);
      return 0;
    }

    if (bench->parsed()) {
      const auto index = retrieval::random_index(rows, dim, seed);
      const auto qs = retrieval::random_queries(queries, dim, seed + 1);
      const auto rep = retrieval::bench_retrieval(index, qs, top_q);
      const std::string json = rep.to_json();
      std::cout << json << "\n";
      if (!bench_out.empty()) text::write_file(bench_out, json + "\n");
      return 0;
    }

    if (run_cmd.app->parsed()) {
      const auto cfg = resolve_config(run_cmd.config_path, run_cmd.overrides);
      const auto owned = pipeline::make_ports(cfg);
      const auto manifest = pipeline::run_pipeline(cfg, owned.view(), {log_line});
      for (const auto& s : manifest.stages) std::cout << s.name << ": " << s.status << "\n";
      std::cout << "manifest: " << (fs::path(cfg.run.dir) / pipeline::artifact::kManifest).string() << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
