#include "rexha/profiler.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "rexha/digest.hpp"
#include "rexha/error.hpp"
#include "rexha/parallel.hpp"
#include "rexha/text.hpp"

namespace rexha::profiler {

using nlohmann::json;

namespace {

std::uint64_t subject_seed(std::uint64_t seed, SubjectKind kind, std::string_view id) {
  std::string key(to_string(kind));
  key += ':';
  key += id;
  return seed ^ fnv1a64(key);
}

std::vector<std::string> review_texts(const std::vector<const corpus::Review*>& reviews) {
  std::vector<std::string> out;
  out.reserve(reviews.size());
  for (const auto* r : reviews) out.push_back(r->text);
  return out;
}

std::vector<const corpus::Review*> subject_reviews(const corpus::Dataset& dataset, SubjectKind kind,
                                                   std::string_view id) {
  return kind == SubjectKind::kUser ? dataset.reviews_of_user(id) : dataset.reviews_of_item(id);
}

const std::string& instruction_for(const Instructions& instructions, SubjectKind kind) {
  return kind == SubjectKind::kUser ? instructions.user : instructions.item;
}

}  // namespace

std::string summarize_group(Summarizer& summarizer, std::span<const std::string> texts,
                            std::string_view instruction, const CallOptions& options) {
  if (texts.empty()) throw Error(ErrorKind::kInvalidArgument, "summarize_group: no input texts");
  if (options.passthrough_singleton && texts.size() == 1) return texts.front();

  const std::size_t per_text = summarizer.input_budget() / texts.size();
  std::vector<std::string> clipped;
  clipped.reserve(texts.size());
  for (const auto& t : texts) clipped.push_back(text::clip_utf8(t, per_text));

  return with_retry(
      options.retry,
      [&] {
        std::string out = summarizer.summarize(instruction, clipped);
        if (text::is_blank(out)) {
          throw Error(ErrorKind::kEmptyOutput, "summarizer " + summarizer.identity() + " returned an empty summary");
        }
        return out;
      },
      options.sleep);
}

std::string_view to_string(ProfileMode mode) noexcept {
  switch (mode) {
    case ProfileMode::kHierarchical: return "hierarchical";
    case ProfileMode::kRandomSample: return "random_sample";
    case ProfileMode::kDirect: return "direct";
    case ProfileMode::kSecondLayer: return "second_layer";
  }
  return "hierarchical";
}

ProfileMode parse_profile_mode(std::string_view name) {
  for (auto m : {ProfileMode::kHierarchical, ProfileMode::kRandomSample, ProfileMode::kDirect,
                 ProfileMode::kSecondLayer}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown profile mode: " + std::string(name));
}

std::string_view to_string(SubjectKind kind) noexcept { return kind == SubjectKind::kUser ? "user" : "item"; }

void ProfilerConfig::validate() const {
  if (arity < 2) throw Error(ErrorKind::kInvalidArgument, "arity must be >= 2");
  if (mode == ProfileMode::kRandomSample && sample_size < 1) {
    throw Error(ErrorKind::kInvalidArgument, "random_sample needs n >= 1");
  }
  if (max_concurrency < 1) throw Error(ErrorKind::kInvalidArgument, "max_concurrency must be >= 1");
}

std::string AggregationTree::digest() const {
  Sha256 h;
  h.field("rexha-tree/1").field(std::to_string(arity)).field(summarizer_identity);
  for (const auto& level : levels) {
    h.field("level").field(std::to_string(level.size()));
    for (const auto& node : level) {
      std::string kids;
      for (auto c : node.children) kids += std::to_string(c) + ",";
      h.field(kids).field(node.summarized ? "s" : "p").field(node.text);
    }
  }
  return h.hex();
}

AggregationTree build_tree(Summarizer& summarizer, std::span<const std::string> texts, const ProfilerConfig& config,
                           std::string_view instruction, const TreeOptions& options) {
  config.validate();
  if (texts.empty()) throw Error(ErrorKind::kInvalidArgument, "build_tree: no reviews");

  AggregationTree tree;
  tree.arity = config.arity;
  tree.summarizer_identity = summarizer.identity();

  std::vector<std::size_t> order(texts.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<TreeNode> leaves(texts.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    leaves[k].text = texts[order[k]];
    leaves[k].source = order[k];
  }
  tree.levels.push_back(std::move(leaves));

  const CallOptions call{config.retry, config.sleep, false};
  const std::size_t k = config.arity;
  const bool single = texts.size() == 1;

  while (tree.levels.back().size() > 1 || (single && tree.levels.size() == 1)) {
    const auto& below = tree.levels.back();
    if (options.stop_below_root && below.size() <= k) break;

    const std::size_t groups = (below.size() + k - 1) / k;
    std::vector<TreeNode> level(groups);
    for (std::size_t g = 0; g < groups; ++g) {
      for (std::size_t c = g * k; c < std::min(below.size(), (g + 1) * k); ++c) level[g].children.push_back(c);
    }
    parallel_for(groups, config.max_concurrency, [&](std::size_t g) {
      TreeNode& node = level[g];
      if (node.children.size() == 1 && !single) {
        node.text = below[node.children.front()].text;
        return;
      }
      std::vector<std::string> inputs;
      inputs.reserve(node.children.size());
      for (auto c : node.children) inputs.push_back(below[c].text);
      node.text = summarize_group(summarizer, inputs, instruction, call);
      node.summarized = true;
    });
    for (const auto& node : level) tree.summarizer_calls += node.summarized ? 1 : 0;
    tree.levels.push_back(std::move(level));
  }
  return tree;
}

namespace {

Profile make_profile(SubjectKind kind, std::string_view id, std::string text, const AggregationTree& tree) {
  return Profile{kind, std::string(id), std::move(text), tree.digest(), tree.summarizer_calls, tree.summarizer_identity};
}

Profile hierarchical_profile(std::vector<std::string> leaves, SubjectKind kind, std::string_view id,
                             Summarizer& summarizer, const ProfilerConfig& config, const Instructions& instructions) {
  ProfilerConfig local = config;
  local.seed = subject_seed(config.seed, kind, id);
  AggregationTree tree = build_tree(summarizer, leaves, local, instruction_for(instructions, kind));
  std::string text = tree.root().text;
  return make_profile(kind, id, std::move(text), tree);
}

}  // namespace

Profile build_user_profile(const corpus::Dataset& dataset, std::string_view user_id, Summarizer& summarizer,
                           const ProfilerConfig& config, const Instructions& instructions,
                           const std::map<std::string, std::string, std::less<>>* item_profiles) {
  const auto reviews = dataset.reviews_of_user(user_id);
  std::vector<std::string> leaves;
  leaves.reserve(reviews.size());
  for (const auto* r : reviews) {
    std::string leaf = r->text;
    if (item_profiles != nullptr) {
      if (const auto it = item_profiles->find(r->item_id); it != item_profiles->end()) {
        leaf += "\nItem description: " + it->second;
      }
    }
    leaves.push_back(std::move(leaf));
  }
  return hierarchical_profile(std::move(leaves), SubjectKind::kUser, user_id, summarizer, config, instructions);
}

Profile build_item_profile(const corpus::Dataset& dataset, std::string_view item_id, Summarizer& summarizer,
                           const ProfilerConfig& config, const Instructions& instructions) {
  return hierarchical_profile(review_texts(dataset.reviews_of_item(item_id)), SubjectKind::kItem, item_id, summarizer,
                              config, instructions);
}

Profile profile_ablation(const corpus::Dataset& dataset, SubjectKind kind, std::string_view subject_id,
                         Summarizer& summarizer, const ProfilerConfig& config, const Instructions& instructions) {
  config.validate();
  if (config.mode == ProfileMode::kHierarchical) {
    throw Error(ErrorKind::kInvalidArgument, "profile_ablation: hierarchical is not an ablation mode");
  }
  std::vector<std::string> texts = review_texts(subject_reviews(dataset, kind, subject_id));
  const std::string& instruction = instruction_for(instructions, kind);
  const std::uint64_t seed = subject_seed(config.seed, kind, subject_id);
  const CallOptions call{config.retry, config.sleep, false};

  // Flat modes record a single-level "tree": the inputs plus one summary node.
  auto flat_tree = [&](std::vector<std::string> inputs, std::string summary) {
    AggregationTree tree;
    tree.arity = inputs.size();
    tree.summarizer_identity = summarizer.identity();
    std::vector<TreeNode> leaves(inputs.size());
    TreeNode root;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      leaves[i].text = std::move(inputs[i]);
      leaves[i].source = i;
      root.children.push_back(i);
    }
    root.text = std::move(summary);
    root.summarized = true;
    tree.levels.push_back(std::move(leaves));
    tree.levels.push_back({std::move(root)});
    tree.summarizer_calls = 1;
    return tree;
  };

  switch (config.mode) {
    case ProfileMode::kRandomSample: {
      std::mt19937_64 rng(seed);
      std::shuffle(texts.begin(), texts.end(), rng);
      texts.resize(std::min(texts.size(), config.sample_size));
      std::string summary = summarize_group(summarizer, texts, instruction, call);
      const AggregationTree tree = flat_tree(texts, summary);
      return make_profile(kind, subject_id, summary, tree);
    }
    case ProfileMode::kDirect: {
      std::size_t total = 0;
      for (const auto& t : texts) total += t.size();
      if (total > summarizer.input_budget()) {
        throw Error(ErrorKind::kBudgetOverflow, "direct profiling of " + std::string(to_string(kind)) + " " +
                                                    std::string(subject_id) + " needs " + std::to_string(total) +
                                                    " bytes, budget is " + std::to_string(summarizer.input_budget()));
      }
      std::string summary = summarize_group(summarizer, texts, instruction, call);
      const AggregationTree tree = flat_tree(texts, summary);
      return make_profile(kind, subject_id, summary, tree);
    }
    case ProfileMode::kSecondLayer: {
      ProfilerConfig local = config;
      local.seed = seed;
      const AggregationTree tree = build_tree(summarizer, texts, local, instruction, TreeOptions{true});
      std::vector<std::string> parts;
      for (const auto& node : tree.levels.back()) parts.push_back(node.text);
      return make_profile(kind, subject_id, text::join(parts, "\n"), tree);
    }
    case ProfileMode::kHierarchical:
      break;
  }
  throw Error(ErrorKind::kInvalidArgument, "unsupported profile mode");
}

Profile build_profile(const corpus::Dataset& dataset, SubjectKind kind, std::string_view subject_id,
                      Summarizer& summarizer, const ProfilerConfig& config, const Instructions& instructions,
                      const std::map<std::string, std::string, std::less<>>* item_profiles) {
  if (config.mode != ProfileMode::kHierarchical) {
    return profile_ablation(dataset, kind, subject_id, summarizer, config, instructions);
  }
  return kind == SubjectKind::kUser
             ? build_user_profile(dataset, subject_id, summarizer, config, instructions, item_profiles)
             : build_item_profile(dataset, subject_id, summarizer, config, instructions);
}

std::vector<Opinion> summarize_opinions(const corpus::Dataset& dataset, Summarizer& summarizer,
                                        std::string_view instruction, std::size_t max_concurrency,
                                        const CallOptions& options) {
  const auto reviews = dataset.reviews();
  std::vector<Opinion> out(reviews.size());
  CallOptions call = options;
  call.passthrough_singleton = false;
  parallel_for(reviews.size(), max_concurrency, [&](std::size_t k) {
    const auto& r = reviews[k];
    const std::string input[1] = {r.text};
    out[k] = Opinion{r.id, r.user_id, r.item_id, summarize_group(summarizer, input, instruction, call)};
  });
  return out;
}

std::string profile_to_json(const Profile& p) {
  return json{{"kind", to_string(p.kind)},    {"id", p.subject_id}, {"text", p.text},
              {"tree_digest", p.tree_digest}, {"calls", p.calls},   {"summarizer", p.summarizer}}
      .dump();
}

Profile profile_from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    Profile p;
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "user" && kind != "item") throw Error(ErrorKind::kParse, "profile kind must be user or item");
    p.kind = kind == "user" ? SubjectKind::kUser : SubjectKind::kItem;
    p.subject_id = j.at("id").get<std::string>();
    p.text = j.at("text").get<std::string>();
    p.tree_digest = j.at("tree_digest").get<std::string>();
    p.calls = j.at("calls").get<std::uint32_t>();
    p.summarizer = j.value("summarizer", "");
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("bad profile record: ") + e.what());
  }
}

std::string opinion_to_json(const Opinion& o) {
  return json{{"review_id", o.review_id}, {"opinion", o.text}, {"user_id", o.user_id}, {"item_id", o.item_id}}.dump();
}

Opinion opinion_from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    return Opinion{j.at("review_id").get<corpus::ReviewId>(), j.value("user_id", ""), j.value("item_id", ""),
                   j.at("opinion").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("bad opinion record: ") + e.what());
  }
}

}  // namespace rexha::profiler
