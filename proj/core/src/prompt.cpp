#include "rexha/prompt.hpp"

#include <chrono>

#include <nlohmann/json.hpp>

#include "rexha/error.hpp"
#include "rexha/text.hpp"

namespace rexha::prompt {

using nlohmann::json;

namespace {

bool is_name_char(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_'; }

std::size_t count_of(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + needle.size())) ++n;
  return n;
}

}  // namespace

std::string render(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t j = i + 1;
      while (j < tmpl.size() && is_name_char(tmpl[j])) ++j;
      if (j < tmpl.size() && tmpl[j] == '}' && j > i + 1) {
        const std::string_view name = tmpl.substr(i + 1, j - i - 1);
        const auto it = values.find(name);
        if (it == values.end()) throw Error(ErrorKind::kValidation, "unresolved placeholder {" + std::string(name) + "}");
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string numbered_list(std::span<const RetrievedOpinion> retrieved) {
  std::string out;
  for (std::size_t k = 0; k < retrieved.size(); ++k) {
    if (k != 0) out += '\n';
    std::string line = retrieved[k].text;
    for (auto& c : line) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    out += std::to_string(k + 1) + ". " + line;
  }
  return out;
}

void validate_template(std::string_view tmpl) {
  for (std::string_view p : {"{user_profile}", "{item_profile}", "{retrieved_reviews}"}) {
    if (tmpl.find(p) == std::string_view::npos) {
      throw Error(ErrorKind::kValidation, "template missing placeholder " + std::string(p));
    }
  }
  for (std::string_view m : {kUserMarker, kItemMarker}) {
    const auto n = count_of(tmpl, m);
    if (n != 1) {
      throw Error(ErrorKind::kValidation,
                  "template must contain " + std::string(m) + " exactly once, found " + std::to_string(n));
    }
  }
}

PromptBundle assemble_prompt(const profiler::Profile& user_profile, const profiler::Profile& item_profile,
                             std::span<const RetrievedOpinion> retrieved, const Eigen::VectorXd& user_embedding,
                             const Eigen::VectorXd& item_embedding, std::string_view tmpl) {
  validate_template(tmpl);
  if (user_embedding.size() != item_embedding.size() || user_embedding.size() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "user and item embeddings must share a non-zero width");
  }
  for (std::size_t k = 1; k < retrieved.size(); ++k) {
    if (retrieved[k].score > retrieved[k - 1].score) {
      throw Error(ErrorKind::kInvalidArgument, "retrieved opinions must be in score order");
    }
  }
  const std::map<std::string, std::string, std::less<>> values{
      {"user_profile", user_profile.text},
      {"item_profile", item_profile.text},
      {"retrieved_reviews", numbered_list(retrieved)},
  };

  PromptBundle b;
  b.user_id = user_profile.subject_id;
  b.item_id = item_profile.subject_id;
  b.text = render(tmpl, values);
  // Markers coming in through profile or opinion text would be ambiguous.
  for (std::string_view m : {kUserMarker, kItemMarker}) {
    if (count_of(b.text, m) != 1) {
      throw Error(ErrorKind::kValidation, "rendered prompt contains " + std::string(m) + " more than once");
    }
  }
  b.sidecar[std::string(kUserMarker)] = std::vector<double>(user_embedding.data(), user_embedding.data() + user_embedding.size());
  b.sidecar[std::string(kItemMarker)] = std::vector<double>(item_embedding.data(), item_embedding.data() + item_embedding.size());
  b.retrieved.assign(retrieved.begin(), retrieved.end());
  return b;
}

std::string PromptBundle::to_json() const {
  json hits = json::array();
  for (const auto& r : retrieved) hits.push_back({{"id", r.id}, {"text", r.text}, {"score", r.score}});
  json side = json::object();
  for (const auto& [k, v] : sidecar) side[k] = v;
  return json{{"user_id", user_id}, {"item_id", item_id}, {"prompt", text}, {"sidecar", side}, {"retrieved", hits}}
      .dump();
}

PromptBundle PromptBundle::from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    PromptBundle b;
    b.user_id = j.at("user_id").get<std::string>();
    b.item_id = j.at("item_id").get<std::string>();
    b.text = j.at("prompt").get<std::string>();
    for (const auto& [k, v] : j.at("sidecar").items()) b.sidecar[k] = v.get<std::vector<double>>();
    for (const auto& h : j.at("retrieved")) {
      b.retrieved.push_back({h.at("id").get<std::string>(), h.at("text").get<std::string>(), h.at("score").get<double>()});
    }
    return b;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("bad prompt bundle: ") + e.what());
  }
}

Generation generate(Generator& generator, const PromptBundle& bundle, const GenerationSettings& settings,
                    const RetryPolicy& retry, const Sleeper& sleep) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::string out = with_retry(
        retry,
        [&] {
          std::string s = generator.generate(bundle, settings);
          if (text::is_blank(s)) throw Error(ErrorKind::kEmptyOutput, "generator returned empty output");
          return s;
        },
        sleep);
    const auto t1 = std::chrono::steady_clock::now();
    return Generation{std::move(out), std::chrono::duration<double, std::milli>(t1 - t0).count()};
  } catch (const Error& e) {
    throw Error(e.kind(), "generation failed for (" + bundle.user_id + ", " + bundle.item_id + "): " + e.what());
  }
}

}  // namespace rexha::prompt
