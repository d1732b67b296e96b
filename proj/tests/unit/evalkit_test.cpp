#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rexha/error.hpp"
#include "rexha/evalkit.hpp"
#include "rexha/mocks.hpp"
#include "rexha/text.hpp"
#include "scratch_dir.hpp"

namespace {

using namespace rexha::eval;
using rexha::Error;
using rexha::ErrorKind;

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

std::vector<Vector> random_tokens(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::vector<Vector> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(oracle::random_unit(rng, d));
  return out;
}

class FixedJudge final : public Judge {
 public:
  explicit FixedJudge(double s) : s_(s) {}
  double score(std::string_view, std::string_view, std::string_view) override { return s_; }
  std::string identity() const override { return "fixed"; }

 private:
  double s_;
};

TEST(BertScore, IdenticalSequences) {
  std::mt19937_64 rng(1);
  const auto toks = random_tokens(rng, 7, 12);
  const auto s = bertscore(toks, toks);
  EXPECT_NEAR(s.precision, 1.0, 1e-6);
  EXPECT_NEAR(s.recall, 1.0, 1e-6);
  EXPECT_NEAR(s.f1, 1.0, 1e-6);
}

TEST(BertScore, TwoVersusOne) {
  const std::vector<Vector> ref = {v2(1, 0), v2(0, 1)};
  const std::vector<Vector> cand = {v2(1, 0)};
  const auto s = bertscore(ref, cand);
  EXPECT_NEAR(s.precision, 0.5, 1e-4);
  EXPECT_NEAR(s.recall, 1.0, 1e-4);
  EXPECT_NEAR(s.f1, 0.6667, 1e-4);

  const auto std_orient = bertscore(ref, cand, BertOptions{true, false});
  EXPECT_DOUBLE_EQ(std_orient.precision, 1.0);
  EXPECT_DOUBLE_EQ(std_orient.recall, 0.5);
}

TEST(BertScore, OrthogonalIsZero) {
  const std::vector<Vector> ref = {v2(1, 0)};
  const std::vector<Vector> cand = {v2(0, 1)};
  const auto s = bertscore(ref, cand);
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_EQ(s.f1, 0.0);
}

TEST(BertScore, MatchesLoopOracle) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> len(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ref = random_tokens(rng, len(rng), 6);
    const auto cand = random_tokens(rng, len(rng), 6);
    const auto got = bertscore(ref, cand);
    const auto want = oracle::loop_bertscore(ref, cand);
    EXPECT_NEAR(got.precision, want.p, 1e-12);
    EXPECT_NEAR(got.recall, want.r, 1e-12);
    EXPECT_NEAR(got.f1, want.f1, 1e-12);
  }
}

TEST(BertScore, SwapSymmetryAndBounds) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_tokens(rng, 1 + trial % 5, 4);
    const auto b = random_tokens(rng, 1 + trial % 7, 4);
    const auto ab = bertscore(a, b);
    const auto ba = bertscore(b, a);
    EXPECT_NEAR(ab.precision, ba.recall, 1e-12);
    EXPECT_NEAR(ab.recall, ba.precision, 1e-12);
    EXPECT_NEAR(ab.f1, ba.f1, 1e-12);
    EXPECT_GE(ab.precision, -1.0);
    EXPECT_LE(ab.precision, 1.0);
    if (ab.precision > 0 && ab.recall > 0) {
      EXPECT_GE(ab.f1, std::min(ab.precision, ab.recall) - 1e-15);
      EXPECT_LE(ab.f1, std::max(ab.precision, ab.recall) + 1e-15);
    }
    const auto clipped = bertscore(a, b, BertOptions{false, true});
    EXPECT_GE(clipped.precision, 0.0);
    EXPECT_GE(clipped.recall, 0.0);
  }
}

TEST(BertScore, EmptySequenceIsError) {
  const std::vector<Vector> one = {v2(1, 0)};
  EXPECT_THROW(bertscore({}, one), Error);
  EXPECT_THROW(bertscore(one, {}), Error);
}

TEST(Judge, LengthRatioMock) {
  rexha::mock::LengthRatioJudge judge;
  EXPECT_DOUBLE_EQ(judge_score(judge, "abcd", "ab", "i"), 50.0);
  EXPECT_DOUBLE_EQ(judge_score(judge, "abcd", "abcdefgh", "i"), 100.0);
  EXPECT_DOUBLE_EQ(judge_score(judge, "same text", "same text", "i"), 100.0);
}

TEST(Judge, OutOfRangeRejected) {
  FixedJudge high(120.0), low(-1.0), nan(std::nan(""));
  for (Judge* j : std::initializer_list<Judge*>{&high, &low, &nan}) {
    try {
      judge_score(*j, "ref", "cand", "i");
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kRange);
    }
  }
  FixedJudge ok(100.0);
  EXPECT_THROW(judge_score(ok, "", "cand", "i"), Error);
  EXPECT_THROW(judge_score(ok, "ref", "  ", "i"), Error);
}

TEST(MeanStd, Cases) {
  const std::vector<double> equal(10, 3.25);
  EXPECT_EQ(mean_std(equal).std, 0.0);
  EXPECT_DOUBLE_EQ(mean_std(equal).mean, 3.25);
  const std::vector<double> two = {0.0, 100.0};
  EXPECT_DOUBLE_EQ(mean_std(two).mean, 50.0);
  EXPECT_DOUBLE_EQ(mean_std(two).std, 50.0);
  EXPECT_THROW(mean_std({}), Error);
}

TEST(MeanStd, MatchesTwoPass) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(0.0, 100.0);
  std::vector<double> xs(100);
  for (auto& x : xs) x = uni(rng);
  const auto s = mean_std(xs);
  const auto [m, sd] = oracle::two_pass_mean_std(xs);
  EXPECT_NEAR(s.mean, m, 1e-9);
  EXPECT_NEAR(s.std, sd, 1e-9);
}

TEST(Aggregate, PermutationInvariantAndConsistent) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<SampleScore> samples;
  for (int k = 0; k < 30; ++k) {
    samples.push_back({"s" + std::to_string(k), {uni(rng), uni(rng), uni(rng)}, 100.0 * uni(rng)});
  }
  const auto a = aggregate(samples);
  std::shuffle(samples.begin(), samples.end(), rng);
  const auto b = aggregate(samples);
  EXPECT_NEAR(a.bert_f1.mean, b.bert_f1.mean, 1e-12);
  EXPECT_NEAR(a.bert_f1.std, b.bert_f1.std, 1e-12);
  ASSERT_TRUE(a.judge.has_value());
  EXPECT_NEAR(a.judge->std, b.judge->std, 1e-12);

  std::vector<double> p;
  for (const auto& s : a.samples) p.push_back(s.bert.precision);
  const auto [m, sd] = oracle::two_pass_mean_std(p);
  EXPECT_NEAR(a.bert_p.mean, m, 1e-9);
  EXPECT_NEAR(a.bert_p.std, sd, 1e-9);
  EXPECT_EQ(a.n, 30u);
}

TEST(Aggregate, JudgeOnlyWhenEverySampleHasOne) {
  std::vector<SampleScore> samples = {{"a", {1, 1, 1}, 50.0}, {"b", {0, 0, 0}, std::nullopt}};
  EXPECT_FALSE(aggregate(samples).judge.has_value());
}

TEST(ScoreReport, JsonRoundTrip) {
  std::vector<SampleScore> samples = {{"u|i", {0.5, 1.0, 2.0 / 3.0}, 40.0}, {"v|j", {0.25, 0.75, 0.375}, 60.0}};
  const auto r = aggregate(samples);
  const std::string text = r.to_json();
  for (const char* key : {"\"n\"", "\"bert_p\"", "\"bert_r\"", "\"bert_f1\"", "\"judge\"", "\"samples\"", "\"mean\"", "\"std\""}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
  const auto back = ScoreReport::from_json(text);
  EXPECT_EQ(back.n, 2u);
  EXPECT_EQ(back.bert_f1.mean, r.bert_f1.mean);
  EXPECT_EQ(back.samples[1].judge, std::optional<double>(60.0));
  EXPECT_EQ(back.to_json(), text);
  EXPECT_THROW(ScoreReport::from_json("{}"), Error);
}

TEST(HashTokenEmbedder, UnitVectorsPerWord) {
  rexha::mock::HashTokenEmbedder emb(32, 7);
  const auto toks = emb.embed_tokens("The cat, the CAT.");
  ASSERT_EQ(toks.size(), 4u);
  for (const auto& t : toks) EXPECT_NEAR(t.norm(), 1.0, 1e-12);
  EXPECT_EQ(toks[0], toks[2]);
  EXPECT_EQ(toks[1], toks[3]);
  EXPECT_EQ(emb.embed_tokens("!!").size(), 1u);
  EXPECT_THROW(emb.embed_tokens("   "), Error);
}

TEST(Evaluate, EndToEndWithMocks) {
  rexha::mock::HashTokenEmbedder emb(32);
  rexha::mock::LengthRatioJudge judge;
  const std::vector<EvalItem> items = {{"a", "great plot and pacing", "great plot and pacing"},
                                       {"b", "cheap and fast shipping", "slow"}};
  const auto r = evaluate(items, emb, &judge);
  EXPECT_NEAR(r.samples[0].bert.f1, 1.0, 1e-12);
  EXPECT_EQ(r.samples[0].judge, std::optional<double>(100.0));
  EXPECT_LT(r.samples[1].bert.f1, 1.0);
  ASSERT_TRUE(r.judge.has_value());
  const auto no_judge = evaluate(items, emb, nullptr);
  EXPECT_FALSE(no_judge.judge.has_value());
}

TEST(Explanations, ReadAndMatch) {
  ScratchDir dir;
  rexha::text::write_file((dir / "refs.jsonl").string(),
                          R"({"user_id":"u1","item_id":"i1","explanation":"good","review":"x"})"
                          "\n"
                          R"({"user_id":"u2","item_id":"i2"})"
                          "\n\n"
                          R"({"user_id":"u3","item_id":"i3","explanation":"fine"})"
                          "\n");
  const ExplanationRecord c1{"u3", "i3", "ok"}, c2{"u1", "i1", "nice"};
  rexha::text::write_file((dir / "cands.jsonl").string(), explanation_to_json(c1) + "\n" + explanation_to_json(c2) + "\n");
  const auto refs = read_explanations((dir / "refs.jsonl").string());
  const auto cands = read_explanations((dir / "cands.jsonl").string());
  ASSERT_EQ(refs.size(), 2u);
  const auto items = match_explanations(refs, cands);
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0].id, "u1|i1");
  EXPECT_EQ(items[0].candidate, "nice");
  EXPECT_EQ(items[1].reference, "fine");

  const std::vector<ExplanationRecord> partial = {c1};
  EXPECT_THROW(match_explanations(refs, partial), Error);
  rexha::text::write_file((dir / "bad.jsonl").string(), "{oops\n");
  EXPECT_THROW(read_explanations((dir / "bad.jsonl").string()), Error);
}

}  // namespace
