#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rexha/retry.hpp"

namespace rexha::eval {

using Vector = Eigen::VectorXd;

/// Port to a contextual token encoder. Every returned vector is unit-norm and
/// non-empty text yields at least one token.
class TokenEmbedder {
 public:
  virtual ~TokenEmbedder() = default;
  virtual std::vector<Vector> embed_tokens(std::string_view text) = 0;
  virtual std::string identity() const = 0;
};

/// Port to an LLM judge scoring a candidate against a reference in [0, 100].
class Judge {
 public:
  virtual ~Judge() = default;
  virtual double score(std::string_view instruction, std::string_view reference, std::string_view candidate) = 0;
  virtual std::string identity() const = 0;
};

struct BertScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct BertOptions {
  // Default: P averages over reference tokens, R over candidate tokens.
  // Set to swap them into the usual BERTScore orientation.
  bool standard_orientation = false;
  // Clip inner products at 0 before taking maxima.
  bool clip = false;
};

/// Greedy max inner-product matching. F1 is 0 when P + R == 0.
BertScore bertscore(std::span<const Vector> reference, std::span<const Vector> candidate,
                    const BertOptions& options = {});

struct JudgeOptions {
  RetryPolicy retry;
  Sleeper sleep = default_sleep;
};

// Rejects empty texts and scores outside [0, 100] (kRange).
double judge_score(Judge& judge, std::string_view reference, std::string_view candidate,
                   std::string_view instruction, const JudgeOptions& options = {});

struct SampleScore {
  std::string id;
  BertScore bert;
  std::optional<double> judge;
};

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // population
};

// Single pass (Welford). Throws on an empty sequence.
Stat mean_std(std::span<const double> values);

struct ScoreReport {
  std::size_t n = 0;
  Stat bert_p;
  Stat bert_r;
  Stat bert_f1;
  std::optional<Stat> judge;  // present iff every sample has a judge score
  std::vector<SampleScore> samples;

  std::string to_json() const;
  static ScoreReport from_json(std::string_view text);
};

ScoreReport aggregate(std::vector<SampleScore> samples);

struct EvalItem {
  std::string id;
  std::string reference;
  std::string candidate;
};

struct EvaluateOptions {
  BertOptions bert;
  std::string judge_instruction;
  JudgeOptions judge;
};

// judge may be null, in which case no judge scores are produced.
ScoreReport evaluate(std::span<const EvalItem> items, TokenEmbedder& embedder, Judge* judge,
                     const EvaluateOptions& options = {});

/// Explanation records for --refs / --cands: one JSON object per line with
/// "user_id", "item_id" and "explanation"; other fields are ignored. Records
/// without an explanation are skipped.
struct ExplanationRecord {
  std::string user_id;
  std::string item_id;
  std::string explanation;
};

std::vector<ExplanationRecord> read_explanations(const std::string& path);
std::string explanation_to_json(const ExplanationRecord& record);

// Pairs refs with cands by (user_id, item_id), in reference order. Every
// reference must have a candidate.
std::vector<EvalItem> match_explanations(std::span<const ExplanationRecord> refs,
                                         std::span<const ExplanationRecord> cands);

}  // namespace rexha::eval
