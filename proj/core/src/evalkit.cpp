#include "rexha/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "rexha/error.hpp"
#include "rexha/text.hpp"

namespace rexha::eval {

using nlohmann::json;

BertScore bertscore(std::span<const Vector> reference, std::span<const Vector> candidate, const BertOptions& options) {
  if (reference.empty() || candidate.empty()) throw Error(ErrorKind::kInvalidArgument, "bertscore: empty token sequence");
  const std::size_t width = static_cast<std::size_t>(reference.front().size());
  for (const auto& v : reference) {
    if (static_cast<std::size_t>(v.size()) != width) throw Error(ErrorKind::kInvalidArgument, "bertscore: width mismatch");
  }
  for (const auto& v : candidate) {
    if (static_cast<std::size_t>(v.size()) != width) throw Error(ErrorKind::kInvalidArgument, "bertscore: width mismatch");
  }

  Eigen::MatrixXd sim(reference.size(), candidate.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    for (std::size_t j = 0; j < candidate.size(); ++j) {
      const double s = reference[i].dot(candidate[j]);
      sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = options.clip ? std::max(0.0, s) : s;
    }
  }
  const double ref_side = sim.rowwise().maxCoeff().mean();
  const double cand_side = sim.colwise().maxCoeff().mean();

  BertScore out;
  out.precision = options.standard_orientation ? cand_side : ref_side;
  out.recall = options.standard_orientation ? ref_side : cand_side;
  const double denom = out.precision + out.recall;
  out.f1 = denom == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / denom;
  return out;
}

double judge_score(Judge& judge, std::string_view reference, std::string_view candidate,
                   std::string_view instruction, const JudgeOptions& options) {
  if (text::is_blank(reference) || text::is_blank(candidate)) {
    throw Error(ErrorKind::kInvalidArgument, "judge_score: empty reference or candidate");
  }
  const double s = with_retry(options.retry, [&] { return judge.score(instruction, reference, candidate); },
                              options.sleep);
  if (!std::isfinite(s) || s < 0.0 || s > 100.0) {
    throw Error(ErrorKind::kRange, "judge score " + std::to_string(s) + " outside [0, 100]");
  }
  return s;
}

Stat mean_std(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::kInvalidArgument, "mean_std: no values");
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double x : values) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  return Stat{mean, std::sqrt(std::max(0.0, m2 / static_cast<double>(n)))};
}

ScoreReport aggregate(std::vector<SampleScore> samples) {
  if (samples.empty()) throw Error(ErrorKind::kInvalidArgument, "aggregate: no samples");
  ScoreReport r;
  r.n = samples.size();
  std::vector<double> p, rc, f, j;
  for (const auto& s : samples) {
    p.push_back(s.bert.precision);
    rc.push_back(s.bert.recall);
    f.push_back(s.bert.f1);
    if (s.judge) j.push_back(*s.judge);
  }
  r.bert_p = mean_std(p);
  r.bert_r = mean_std(rc);
  r.bert_f1 = mean_std(f);
  if (j.size() == samples.size()) r.judge = mean_std(j);
  r.samples = std::move(samples);
  return r;
}

namespace {

json stat_json(const Stat& s) { return json{{"mean", s.mean}, {"std", s.std}}; }

Stat stat_from(const json& j) { return Stat{j.at("mean").get<double>(), j.at("std").get<double>()}; }

}  // namespace

std::string ScoreReport::to_json() const {
  json j;
  j["n"] = n;
  j["bert_p"] = stat_json(bert_p);
  j["bert_r"] = stat_json(bert_r);
  j["bert_f1"] = stat_json(bert_f1);
  j["judge"] = judge ? stat_json(*judge) : json(nullptr);
  json arr = json::array();
  for (const auto& s : samples) {
    json o{{"id", s.id}, {"bert_p", s.bert.precision}, {"bert_r", s.bert.recall}, {"bert_f1", s.bert.f1}};
    o["judge"] = s.judge ? json(*s.judge) : json(nullptr);
    arr.push_back(std::move(o));
  }
  j["samples"] = std::move(arr);
  return j.dump(2) + "\n";
}

ScoreReport ScoreReport::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    ScoreReport r;
    r.n = j.at("n").get<std::size_t>();
    r.bert_p = stat_from(j.at("bert_p"));
    r.bert_r = stat_from(j.at("bert_r"));
    r.bert_f1 = stat_from(j.at("bert_f1"));
    if (!j.at("judge").is_null()) r.judge = stat_from(j.at("judge"));
    for (const auto& o : j.at("samples")) {
      SampleScore s;
      s.id = o.at("id").get<std::string>();
      s.bert = {o.at("bert_p").get<double>(), o.at("bert_r").get<double>(), o.at("bert_f1").get<double>()};
      if (!o.at("judge").is_null()) s.judge = o.at("judge").get<double>();
      r.samples.push_back(std::move(s));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("bad score report: ") + e.what());
  }
}

ScoreReport evaluate(std::span<const EvalItem> items, TokenEmbedder& embedder, Judge* judge,
                     const EvaluateOptions& options) {
  if (items.empty()) throw Error(ErrorKind::kInvalidArgument, "evaluate: no items");
  std::vector<SampleScore> samples;
  samples.reserve(items.size());
  for (const auto& item : items) {
    const auto ref = embedder.embed_tokens(item.reference);
    const auto cand = embedder.embed_tokens(item.candidate);
    SampleScore s;
    s.id = item.id;
    s.bert = bertscore(ref, cand, options.bert);
    if (judge != nullptr) {
      s.judge = judge_score(*judge, item.reference, item.candidate, options.judge_instruction, options.judge);
    }
    samples.push_back(std::move(s));
  }
  return aggregate(std::move(samples));
}

std::vector<ExplanationRecord> read_explanations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::vector<ExplanationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw Error(ErrorKind::kParse, path + ": line " + std::to_string(line_no) + ": malformed JSON");
    }
    if (!j.is_object() || !j.contains("user_id") || !j.contains("item_id")) {
      throw Error(ErrorKind::kParse, path + ": line " + std::to_string(line_no) + ": missing user_id/item_id");
    }
    const auto it = j.find("explanation");
    if (it == j.end() || it->is_null()) continue;
    try {
      out.push_back({j["user_id"].get<std::string>(), j["item_id"].get<std::string>(), it->get<std::string>()});
    } catch (const json::exception&) {
      throw Error(ErrorKind::kParse, path + ": line " + std::to_string(line_no) + ": fields must be strings");
    }
  }
  return out;
}

std::string explanation_to_json(const ExplanationRecord& record) {
  return json{{"user_id", record.user_id}, {"item_id", record.item_id}, {"explanation", record.explanation}}.dump();
}

std::vector<EvalItem> match_explanations(std::span<const ExplanationRecord> refs,
                                         std::span<const ExplanationRecord> cands) {
  std::map<std::pair<std::string, std::string>, const ExplanationRecord*> by_pair;
  for (const auto& c : cands) by_pair[{c.user_id, c.item_id}] = &c;
  std::vector<EvalItem> items;
  for (const auto& r : refs) {
    const auto it = by_pair.find({r.user_id, r.item_id});
    if (it == by_pair.end()) {
      throw Error(ErrorKind::kNotFound, "no candidate for (" + r.user_id + ", " + r.item_id + ")");
    }
    items.push_back({r.user_id + "|" + r.item_id, r.explanation, it->second->explanation});
  }
  return items;
}

}  // namespace rexha::eval
