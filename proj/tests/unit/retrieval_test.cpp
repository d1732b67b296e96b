#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rexha/error.hpp"
#include "rexha/mocks.hpp"
#include "rexha/retrieval.hpp"
#include "rexha/text.hpp"
#include "scratch_dir.hpp"

namespace {

using namespace rexha::retrieval;
using rexha::Error;
using rexha::ErrorKind;

// Returns fixed vectors keyed by text; unknown text maps to zeros.
class TableEmbedder final : public Embedder {
 public:
  TableEmbedder(std::size_t dim, std::map<std::string, std::vector<float>> table)
      : dim_(dim), table_(std::move(table)) {}
  std::vector<std::vector<float>> embed(std::span<const std::string> texts) override {
    ++calls;
    std::vector<std::vector<float>> out;
    for (const auto& t : texts) {
      const auto it = table_.find(t);
      out.push_back(it == table_.end() ? std::vector<float>(dim_, 0.0f) : it->second);
    }
    return out;
  }
  std::size_t dimension() const override { return dim_; }
  std::string identity() const override { return "table"; }
  int calls = 0;

 private:
  std::size_t dim_;
  std::map<std::string, std::vector<float>> table_;
};

UnitVector unit(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return UnitVector::normalize(v);
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

VectorIndex abc_index() {
  VectorIndex index(2);
  const float a[] = {1, 0}, b[] = {0.6f, 0.8f}, c[] = {0, 1};
  index.add("A", a, {"uA", "iA"});
  index.add("B", b, {"uB", "iB"});
  index.add("C", c, {"uC", "iC"});
  return index;
}

TEST(UnitVector, ThreeFourFive) {
  const auto u = unit({3, 4});
  EXPECT_NEAR(u.vector()[0], 0.6, 1e-15);
  EXPECT_NEAR(u.vector()[1], 0.8, 1e-15);
  EXPECT_FALSE(u.is_zero());
  const auto z = unit({0, 0, 0});
  EXPECT_TRUE(z.is_zero());
  EXPECT_EQ(z.vector(), Vector::Zero(3));
}

TEST(EmbedOpinions, UnitRowsAndZeroFlag) {
  TableEmbedder emb(2, {{"three four", {3, 4}}, {"x", {0, -2}}});
  const std::vector<Document> docs = {{"1", "three four", {"u", "i"}}, {"2", "unknown", {"u", "j"}}, {"3", "x", {"v", "i"}}};
  const auto index = embed_opinions(emb, docs);
  ASSERT_EQ(index.size(), 3u);
  EXPECT_FLOAT_EQ(index.row(0)[0], 0.6f);
  EXPECT_FLOAT_EQ(index.row(0)[1], 0.8f);
  EXPECT_TRUE(index.is_zero(1));
  EXPECT_EQ(index.id(2), "3");
  EXPECT_EQ(index.meta(2), (RowMeta{"v", "i"}));

  // The zero row is never retrieved.
  const auto res = retrieve_top_q(index, unit({1, 1}), 5);
  ASSERT_EQ(res.hits.size(), 2u);
  for (const auto& h : res.hits) EXPECT_NE(h.id, "2");
}

TEST(EmbedOpinions, HashMockBatchesPreserveOrder) {
  rexha::mock::HashEmbedder emb(16);
  std::vector<Document> docs;
  for (int k = 0; k < 7; ++k) docs.push_back({std::to_string(k), "opinion number " + std::to_string(k) + " great", {"u", std::to_string(k)}});
  EmbedOptions opts;
  opts.batch_size = 3;
  const auto batched = embed_opinions(emb, docs, opts);
  EXPECT_EQ(emb.calls(), 3u);
  const auto whole = embed_opinions(emb, docs);
  for (std::size_t r = 0; r < 7; ++r) {
    const auto a = batched.row(r), b = whole.row(r);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    double sq = 0.0;
    for (float x : a) sq += double(x) * x;
    EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-6);
  }
}

TEST(EmbedOpinions, WidthDriftIsError) {
  class Drifting final : public Embedder {
   public:
    std::vector<std::vector<float>> embed(std::span<const std::string> texts) override {
      return std::vector<std::vector<float>>(texts.size(), std::vector<float>(3, 1.0f));
    }
    std::size_t dimension() const override { return 4; }
    std::string identity() const override { return "drift"; }
  } drift;
  const std::vector<Document> docs = {{"1", "a", {"u", "i"}}};
  EXPECT_THROW(embed_opinions(drift, docs), Error);
  EXPECT_THROW(embed_opinions(drift, std::span<const Document>{}), Error);
}

TEST(VectorIndex, RejectsDuplicatesAndBadRows) {
  VectorIndex index(2);
  const float a[] = {1, 0};
  index.add("A", a, {"u", "i"});
  EXPECT_THROW(index.add("A", a, {"u", "i"}), Error);
  const float wide[] = {1, 0, 0};
  EXPECT_THROW(index.add("W", wide, {"u", "i"}), Error);
  const float not_unit[] = {2, 0};
  EXPECT_THROW(index.add_normalized("N", not_unit, {"u", "i"}), Error);
}

TEST(LatentQuery, SingleVectors) {
  const std::vector<UnitVector> u = {unit({1, 0})}, i = {unit({0, 1})};
  const Vector raw = latent_query_raw(u, i);
  EXPECT_NEAR(raw[0], 0.5, 1e-15);
  EXPECT_NEAR(raw[1], 0.5, 1e-15);
  const auto q = latent_query(u, i);
  EXPECT_NEAR(q.vector()[0], std::sqrt(0.5), 1e-15);
}

TEST(LatentQuery, IdenticalVectorsIdempotent) {
  const auto v = unit({0.2, -0.4, 0.7});
  const std::vector<UnitVector> side = {v, v, v};
  const auto q = latent_query(side, side);
  EXPECT_LE((q.vector() - v.vector()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LatentQuery, MatchesScalarLoop) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<UnitVector> u, i;
    for (int k = 0; k < 3; ++k) u.push_back(UnitVector::normalize(oracle::random_unit(rng, 6)));
    for (int k = 0; k < 2; ++k) i.push_back(UnitVector::normalize(oracle::random_unit(rng, 6)));
    const Vector got = latent_query_raw(u, i);
    for (Eigen::Index c = 0; c < 6; ++c) {
      double su = 0.0, si = 0.0;
      for (const auto& v : u) su += v.vector()[c];
      for (const auto& v : i) si += v.vector()[c];
      EXPECT_NEAR(got[c], (su / 3.0 + si / 2.0) / 2.0, 1e-12);
    }
    // Permutation invariance.
    std::reverse(u.begin(), u.end());
    EXPECT_LE((latent_query_raw(u, i) - got).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(LatentQuery, SkipsZeroAndRejectsEmptySide) {
  const std::vector<UnitVector> u = {unit({1, 0}), unit({0, 0})};
  const std::vector<UnitVector> i = {unit({0, 1})};
  EXPECT_NEAR(latent_query_raw(u, i)[0], 0.5, 1e-15);
  const std::vector<UnitVector> zeros = {unit({0, 0})};
  EXPECT_THROW(latent_query_raw(zeros, i), Error);
  EXPECT_THROW(latent_query_raw({}, i), Error);
}

// Scalar InfoNCE oracle over unit rows.
double loss_oracle(const std::vector<Vector>& p, const std::vector<Vector>& r, double tau, ContrastiveForm form) {
  return oracle::info_nce(p, r, tau, form == ContrastiveForm::kAnchorVsAll);
}

TEST(ContrastiveLoss, EqualPairsGiveLn2) {
  const std::vector<UnitVector> a = {unit({1, 0}), unit({0, 1})};
  const std::vector<UnitVector> p = {unit({1, 1}), unit({1, 1})};
  EXPECT_NEAR(contrastive_loss(a, p, 0.07), std::log(2.0), 1e-12);
  EXPECT_NEAR(contrastive_loss(a, p, 0.07), 0.69315, 1e-5);
}

TEST(ContrastiveLoss, MatchesScalarOracle) {
  std::mt19937_64 rng(31);
  for (auto form : {ContrastiveForm::kAsPrinted, ContrastiveForm::kAnchorVsAll}) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Vector> pv, rv;
      std::vector<UnitVector> pu, ru;
      for (int k = 0; k < 5; ++k) {
        pv.push_back(oracle::random_unit(rng, 4));
        rv.push_back(oracle::random_unit(rng, 4));
        pu.push_back(UnitVector::normalize(pv.back()));
        ru.push_back(UnitVector::normalize(rv.back()));
      }
      EXPECT_NEAR(contrastive_loss(pu, ru, 0.3, form), loss_oracle(pv, rv, 0.3, form), 1e-12);
    }
  }
}

TEST(ContrastiveLoss, ShrinksWithTemperatureWhenAligned) {
  // Each anchor coincides with its own opinion and is far from the others.
  const std::vector<UnitVector> a = {unit({1, 0, 0}), unit({0, 1, 0}), unit({0, 0, 1})};
  const double hot = contrastive_loss(a, a, 1.0, ContrastiveForm::kAnchorVsAll);
  const double cold = contrastive_loss(a, a, 0.1, ContrastiveForm::kAnchorVsAll);
  EXPECT_LT(cold, hot);
  EXPECT_LT(cold, 1e-3);
  EXPECT_NEAR(hot, std::log(1.0 + 2.0 * std::exp(-1.0)), 1e-12);
}

TEST(ContrastiveLoss, JointPermutationInvariant) {
  std::mt19937_64 rng(8);
  std::vector<UnitVector> a, p;
  for (int k = 0; k < 6; ++k) {
    a.push_back(UnitVector::normalize(oracle::random_unit(rng, 5)));
    p.push_back(UnitVector::normalize(oracle::random_unit(rng, 5)));
  }
  for (auto form : {ContrastiveForm::kAsPrinted, ContrastiveForm::kAnchorVsAll}) {
    const double base = contrastive_loss(a, p, 0.2, form);
    auto a2 = a, p2 = p;
    std::rotate(a2.begin(), a2.begin() + 2, a2.end());
    std::rotate(p2.begin(), p2.begin() + 2, p2.end());
    EXPECT_NEAR(contrastive_loss(a2, p2, 0.2, form), base, 1e-12);
  }
}

TEST(ContrastiveLoss, Preconditions) {
  const std::vector<UnitVector> one = {unit({1, 0})};
  EXPECT_THROW(contrastive_loss(one, one, 0.1), Error);
  const std::vector<UnitVector> two = {unit({1, 0}), unit({0, 1})};
  EXPECT_THROW(contrastive_loss(two, two, 0.0), Error);
  EXPECT_THROW(contrastive_loss(two, one, 0.1), Error);
}

double adapted_loss(const AdapterParams& ad, const RowMatrix& pb, const RowMatrix& ob, double tau, ContrastiveForm form) {
  return oracle::adapted_info_nce(ad.weight, ad.bias, pb, ob, tau, form == ContrastiveForm::kAnchorVsAll);
}

TEST(ContrastiveGradient, MatchesFiniteDifferences) {
  for (auto form : {ContrastiveForm::kAsPrinted, ContrastiveForm::kAnchorVsAll}) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      std::mt19937_64 rng(seed);
      const std::size_t n = 5, d = 4;
      RowMatrix pb(n, d), ob(n, d);
      for (std::size_t i = 0; i < n; ++i) {
        pb.row(static_cast<Eigen::Index>(i)) = oracle::random_unit(rng, d).transpose();
        ob.row(static_cast<Eigen::Index>(i)) = oracle::random_unit(rng, d).transpose();
      }
      AdapterParams ad = AdapterParams::identity(d);
      std::normal_distribution<double> normal(0.0, 0.3);
      for (Eigen::Index k = 0; k < ad.weight.size(); ++k) ad.weight.data()[k] += normal(rng);
      for (Eigen::Index k = 0; k < ad.bias.size(); ++k) ad.bias[k] = normal(rng);

      const auto g = contrastive_gradient(ad, pb, ob, 0.5, form);
      const auto f = [&] { return adapted_loss(ad, pb, ob, 0.5, form); };
      EXPECT_NEAR(g.loss, f(), 1e-12);
      for (Eigen::Index k = 0; k < ad.weight.size(); ++k) {
        const double num = oracle::central_difference(ad.weight.data() + k, f);
        EXPECT_LE(oracle::rel_error(g.weight.data()[k], num), 1e-4);
      }
      for (Eigen::Index k = 0; k < ad.bias.size(); ++k) {
        const double num = oracle::central_difference(ad.bias.data() + k, f);
        EXPECT_LE(oracle::rel_error(g.bias[k], num), 1e-4);
      }
    }
  }
}

TEST(Adapter, IdentityKeepsRankings) {
  std::mt19937_64 rng(77);
  const auto ad = AdapterParams::identity(8);
  for (int t = 0; t < 10; ++t) {
    const auto x = UnitVector::normalize(oracle::random_unit(rng, 8));
    EXPECT_LE((ad.apply(x).vector() - x.vector()).cwiseAbs().maxCoeff(), 1e-15);
  }
  const auto index = random_index(50, 8, 3);
  const auto adapted = adapt_index(index, ad);
  const auto q = random_queries(5, 8, 4);
  for (const auto& query : q) {
    EXPECT_EQ(retrieve_top_q(index, query, 5).hits.front().id, retrieve_top_q(adapted, ad.apply(query), 5).hits.front().id);
  }
}

TEST(Adapter, ZeroWeightGivesNormalizedBias) {
  AdapterParams ad;
  ad.weight = RowMatrix::Zero(3, 3);
  ad.bias = vec({0, 3, 4});
  rexha::mock::HashEmbedder emb(3);
  const rexha::profiler::Profile u{rexha::profiler::SubjectKind::kUser, "u", "likes long novels", "", 1, ""};
  const rexha::profiler::Profile i{rexha::profiler::SubjectKind::kItem, "i", "a short poem", "", 1, ""};
  const auto q = profile_query(ad, emb, u, i);
  EXPECT_NEAR(q.vector()[1], 0.6, 1e-15);
  EXPECT_NEAR(q.vector()[2], 0.8, 1e-15);
}

TEST(Adapter, IdentityProfileQueryIsBaseEmbedding) {
  rexha::mock::HashEmbedder emb(16);
  const rexha::profiler::Profile u{rexha::profiler::SubjectKind::kUser, "u", "likes long novels", "", 1, ""};
  const rexha::profiler::Profile i{rexha::profiler::SubjectKind::kItem, "i", "a short poem", "", 1, ""};
  const auto q = profile_query(AdapterParams::identity(16), emb, u, i);
  const std::vector<std::string> text = {profile_query_text(u, i)};
  const auto base = UnitVector::normalize(std::span<const float>(emb.embed(text).front()));
  EXPECT_LE((q.vector() - base.vector()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(profile_query_text(u, i), "likes long novels\n\na short poem");
}

TEST(Adapter, JsonRoundTrip) {
  std::mt19937_64 rng(2);
  AdapterParams ad = AdapterParams::identity(3);
  ad.weight(1, 2) = 0.1234567890123;
  ad.bias[0] = -1e-7;
  const auto back = AdapterParams::from_json(ad.to_json());
  EXPECT_EQ(back.weight, ad.weight);
  EXPECT_EQ(back.bias, ad.bias);
  EXPECT_THROW(AdapterParams::from_json("{\"dimension\":2,\"weight\":[1],\"bias\":[0,0]}"), Error);
}

TEST(FitAdapter, LossDecreasesAndZeroLrNoOp) {
  std::vector<std::pair<std::string, std::string>> pairs;
  const char* topics[] = {"mystery", "romance", "cooking", "travel", "poetry", "history", "science", "sports"};
  for (const char* t : topics) pairs.push_back({std::string("reader who enjoys ") + t + " books", std::string(t) + " was a delight"});
  rexha::mock::HashEmbedder emb(32);
  ContrastiveConfig cfg;
  cfg.steps = 300;
  cfg.batch_size = 8;
  cfg.learning_rate = 0.05;
  const auto fit = fit_adapter(pairs, emb, cfg);
  EXPECT_LT(fit.final_loss, fit.initial_loss);
  EXPECT_EQ(fit.step_losses.size(), 300u);
  const auto again = fit_adapter(pairs, emb, cfg);
  EXPECT_EQ(again.params.weight, fit.params.weight);

  cfg.learning_rate = 0.0;
  const auto still = fit_adapter(pairs, emb, cfg);
  EXPECT_EQ(still.params.weight, AdapterParams::identity(32).weight);
  EXPECT_EQ(still.params.bias, AdapterParams::identity(32).bias);
}

TEST(FitAdapter, MinibatchesAreSeedDeterministic) {
  const auto f = oracle::separable_fixture(3, 12, 8);
  ContrastiveConfig cfg;
  cfg.batch_size = 4;
  cfg.steps = 30;
  cfg.seed = 5;
  const auto a = fit_adapter(f.profiles, f.opinions, cfg);
  const auto b = fit_adapter(f.profiles, f.opinions, cfg);
  EXPECT_EQ(a.step_losses, b.step_losses);
  cfg.seed = 6;
  EXPECT_NE(fit_adapter(f.profiles, f.opinions, cfg).step_losses, a.step_losses);
}

TEST(RetrieveTopQ, WorkedExample) {
  const auto index = abc_index();
  const auto res = retrieve_top_q(index, unit({1, 0}), 2, {}, "q1");
  ASSERT_EQ(res.hits.size(), 2u);
  EXPECT_EQ(res.hits[0].id, "A");
  EXPECT_NEAR(res.hits[0].score, 1.0, 1e-7);
  EXPECT_EQ(res.hits[1].id, "B");
  EXPECT_NEAR(res.hits[1].score, 0.6, 1e-7);
  EXPECT_EQ(res.query_id, "q1");
  EXPECT_EQ(res.requested, 2u);
}

TEST(RetrieveTopQ, SaturatesAndExcludes) {
  const auto index = abc_index();
  const auto all = retrieve_top_q(index, unit({0, 1}), 10);
  ASSERT_EQ(all.hits.size(), 3u);
  EXPECT_EQ(all.hits[0].id, "C");
  EXPECT_EQ(all.hits[2].id, "A");
  const auto ex = retrieve_top_q(index, unit({1, 0}), 10, {{"uA", "iA"}});
  ASSERT_EQ(ex.hits.size(), 2u);
  for (const auto& h : ex.hits) EXPECT_NE(h.id, "A");
  EXPECT_THROW(retrieve_top_q(index, unit({1, 0}), 0), Error);
  EXPECT_THROW(retrieve_top_q(index, unit({1, 0, 0}), 1), Error);
}

TEST(RetrieveTopQ, TiesBreakByAscendingStringId) {
  VectorIndex index(2);
  const float v[] = {1, 0};
  for (const char* id : {"9", "10", "b", "a"}) index.add(id, v, {"u", id});
  const auto res = retrieve_top_q(index, unit({1, 0}), 3);
  ASSERT_EQ(res.hits.size(), 3u);
  EXPECT_EQ(res.hits[0].id, "10");
  EXPECT_EQ(res.hits[1].id, "9");
  EXPECT_EQ(res.hits[2].id, "a");
}

TEST(RetrieveTopQ, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<std::size_t> rows_d(1, 300), q_d(1, 20);
    const std::size_t rows = rows_d(rng), dim = 3 + trial % 5, q = q_d(rng);
    VectorIndex index(dim);
    std::vector<std::string> ids;
    std::vector<std::vector<float>> data;
    std::vector<bool> skip;
    std::uniform_int_distribution<int> coarse(-2, 2);
    for (std::size_t r = 0; r < rows; ++r) {
      // Coarse integer components produce plenty of exact ties.
      std::vector<float> raw(dim);
      for (auto& x : raw) x = static_cast<float>(coarse(rng));
      const std::string id = std::to_string(rows - r);
      index.add(id, raw, {"u" + std::to_string(r % 7), "i" + std::to_string(r % 5)});
    }
    const std::set<PairKey> exclude = {{"u1", "i1"}, {"u3", "i0"}};
    for (std::size_t r = 0; r < index.size(); ++r) {
      ids.push_back(index.id(r));
      data.emplace_back(index.row(r).begin(), index.row(r).end());
      skip.push_back(index.is_zero(r) || exclude.count({index.meta(r).user_id, index.meta(r).item_id}) != 0);
    }
    const auto query = UnitVector::normalize(oracle::random_unit(rng, dim));
    const auto want = oracle::exhaustive_top_q(ids, data, skip, query.vector(), q);
    const auto got = retrieve_top_q(index, query, q, exclude);
    ASSERT_EQ(got.hits.size(), want.size());
    for (std::size_t k = 0; k < want.size(); ++k) {
      EXPECT_EQ(got.hits[k].id, want[k].id);
      EXPECT_EQ(got.hits[k].score, want[k].score);
    }
  }
}

TEST(RetrievedSetSimilarity, IdenticalAndOrthogonal) {
  VectorIndex index(2);
  const float a[] = {1, 0}, b[] = {0, 1};
  index.add("x", a, {"u", "1"});
  index.add("y", a, {"u", "2"});
  index.add("z", b, {"u", "3"});
  RetrievalResult same{"q", {{"x", 1}, {"y", 1}}, 2};
  EXPECT_EQ(retrieved_set_similarity(index, same), RowMatrix::Ones(2, 2));
  RetrievalResult orth{"q", {{"x", 1}, {"z", 0}}, 2};
  EXPECT_EQ(retrieved_set_similarity(index, orth), RowMatrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(mean_off_diagonal(retrieved_set_similarity(index, same)), 1.0);
  EXPECT_DOUBLE_EQ(mean_off_diagonal(retrieved_set_similarity(index, orth)), 0.0);
}

TEST(BenchRetrieval, TinyCorpus) {
  const auto index = random_index(10, 8, 1);
  const auto queries = random_queries(50, 8, 2);
  const auto rep = bench_retrieval(index, queries, 3);
  EXPECT_EQ(rep.rows, 10u);
  EXPECT_EQ(rep.dimension, 8u);
  EXPECT_EQ(rep.queries, 50u);
  EXPECT_EQ(rep.threads, 1u);
  EXPECT_LT(rep.p99_ms, 1.0);
  EXPECT_LE(rep.p50_ms, rep.p95_ms);
  EXPECT_LE(rep.p95_ms, rep.p99_ms);
  EXPECT_NE(rep.to_json().find("\"p99_ms\""), std::string::npos);
}

TEST(EmbeddingCache, RoundTrip) {
  ScratchDir dir;
  VectorIndex index(3);
  const float a[] = {1, 2, 2}, z[] = {0, 0, 0};
  index.add("r\xc3\xa9view-1", a, {"u1", "i1"});
  index.add("2", z, {"u2", "i2"});
  write_embedding_cache(dir / "e.rxha", index);

  // Header bytes.
  const std::string bytes = rexha::text::read_file((dir / "e.rxha").string());
  EXPECT_EQ(bytes.substr(0, 4), "RXHA");
  EXPECT_EQ(bytes.size(), 4u + 4 + 4 + 8 + (2 + 9 + 12) + (2 + 1 + 12));

  const auto cache = read_embedding_cache(dir / "e.rxha");
  EXPECT_EQ(cache.dimension, 3u);
  EXPECT_EQ(cache.ids, (std::vector<std::string>{"r\xc3\xa9view-1", "2"}));
  const auto back = index_from_cache(cache, [&](const std::string& id) { return index.meta(*index.find(id)); });
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_TRUE(std::equal(back.row(r).begin(), back.row(r).end(), index.row(r).begin()));
    EXPECT_EQ(back.meta(r), index.meta(r));
  }
  EXPECT_TRUE(back.is_zero(1));
}

TEST(EmbeddingCache, RejectsCorruption) {
  ScratchDir dir;
  write_embedding_cache(dir / "e.rxha", random_index(4, 5, 1));
  const std::string good = rexha::text::read_file((dir / "e.rxha").string());
  rexha::text::write_file((dir / "bad_magic").string(), "XXXX" + good.substr(4));
  EXPECT_THROW(read_embedding_cache(dir / "bad_magic"), Error);
  rexha::text::write_file((dir / "short").string(), good.substr(0, good.size() - 3));
  EXPECT_THROW(read_embedding_cache(dir / "short"), Error);
  rexha::text::write_file((dir / "long").string(), good + "x");
  EXPECT_THROW(read_embedding_cache(dir / "long"), Error);
}

}  // namespace
