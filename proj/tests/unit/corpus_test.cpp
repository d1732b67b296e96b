#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "rexha/corpus.hpp"
#include "rexha/error.hpp"
#include "scratch_dir.hpp"

namespace {

using namespace rexha::corpus;
using rexha::Error;
using rexha::ErrorKind;

Dataset parse(const std::string& text, DuplicatePolicy dup = DuplicatePolicy::kReject) {
  std::istringstream in(text);
  return parse_reviews(in, LoadOptions{dup});
}

std::string line(const std::string& u, const std::string& i, const std::string& text) {
  return R"({"user_id":")" + u + R"(","item_id":")" + i + R"(","review":")" + text + "\"}\n";
}

Dataset numbered(std::size_t n) {
  std::vector<Review> rs;
  for (std::size_t k = 0; k < n; ++k) {
    rs.push_back(Review{k + 1, "u" + std::to_string(k), "i" + std::to_string(k), "text " + std::to_string(k), {}});
  }
  return Dataset::from_reviews(std::move(rs));
}

TEST(LoadReviews, ThreeLinesTwoUsers) {
  const auto ds = parse(line("u1", "i1", "a") + line("u1", "i2", "b") + line("u2", "i1", "c"));
  EXPECT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.user_index().size(), 2u);
  EXPECT_EQ(ds.reviews()[0].id, 1u);
  EXPECT_EQ(ds.reviews()[2].id, 3u);
  EXPECT_EQ(ds.reviews_of_user("u1").size(), 2u);
}

TEST(LoadReviews, EmptyFileIsError) {
  try {
    parse("");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("empty dataset"), std::string::npos);
  }
}

TEST(LoadReviews, MissingItemNamesLine) {
  try {
    parse(line("u1", "i1", "a") + R"({"user_id":"u2","review":"x"})" + "\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("item_id"), std::string::npos);
  }
}

TEST(LoadReviews, MalformedJsonNamesLine) {
  try {
    parse(line("u1", "i1", "a") + line("u1", "i2", "b") + "{not json\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(LoadReviews, DuplicatePairPolicy) {
  const std::string text = line("u1", "i1", "first") + line("u1", "i1", "second");
  EXPECT_THROW(parse(text), Error);
  const auto ds = parse(text, DuplicatePolicy::kKeepLatest);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.reviews()[0].text, "second");
}

TEST(LoadReviews, UnknownSubjects) {
  const auto ds = parse(line("u1", "i1", "a"));
  EXPECT_THROW(ds.reviews_of_user("nobody"), Error);
  EXPECT_THROW(ds.reviews_of_item("nothing"), Error);
}

TEST(LoadReviews, RoundTripThroughFile) {
  ScratchDir dir;
  std::vector<Review> rs = {
      {4, "u\"1", "i1", "multi\nline \xc3\xa9", std::string("because")},
      {9, "u2", "i1", "plain", std::nullopt},
  };
  const auto ds = Dataset::from_reviews(rs);
  write_reviews(ds, dir / "r.jsonl");
  const auto back = load_reviews(dir / "r.jsonl");
  EXPECT_EQ(back, ds);
  EXPECT_EQ(back.reviews()[0].explanation, std::optional<std::string>("because"));
  EXPECT_EQ(back.reviews()[1].id, 9u);
}

TEST(InteractionGraph, DegreesOfSmallExample) {
  const auto ds = parse(line("u1", "i1", "a") + line("u1", "i2", "b") + line("u2", "i1", "c"));
  const auto g = build_interaction_graph(ds);
  const auto u1 = *g.user_ordinal("u1");
  const auto u2 = *g.user_ordinal("u2");
  const auto i1 = *g.item_ordinal("i1");
  const auto i2 = *g.item_ordinal("i2");
  EXPECT_EQ(g.user_degree(u1), 2u);
  EXPECT_EQ(g.user_degree(u2), 1u);
  EXPECT_EQ(g.item_degree(i1), 2u);
  EXPECT_EQ(g.item_degree(i2), 1u);
  EXPECT_NO_THROW(g.validate());
}

TEST(InteractionGraph, SingleReview) {
  const auto g = build_interaction_graph(parse(line("u", "i", "a")));
  EXPECT_EQ(g.user_degree(0), 1u);
  EXPECT_EQ(g.item_degree(0), 1u);
}

TEST(InteractionGraph, DegreeSumsMatchDistinctPairs) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> pick(0, 6);
    std::string text;
    std::set<std::pair<int, int>> pairs;
    for (int k = 0; k < 25; ++k) {
      const int u = pick(rng), i = pick(rng);
      pairs.insert({u, i});
      text += line("u" + std::to_string(u), "i" + std::to_string(i), "r");
    }
    const auto g = build_interaction_graph(parse(text, DuplicatePolicy::kKeepLatest));
    std::size_t su = 0, si = 0;
    for (std::uint32_t u = 0; u < g.num_users(); ++u) su += g.user_degree(u);
    for (std::uint32_t i = 0; i < g.num_items(); ++i) si += g.item_degree(i);
    EXPECT_EQ(su, pairs.size());
    EXPECT_EQ(si, pairs.size());
    EXPECT_EQ(g.num_edges(), pairs.size());
  }
}

TEST(InteractionGraph, FromEdgesCollapsesDuplicates) {
  const std::vector<InteractionGraph::Edge> edges = {{0, 0}, {0, 0}, {1, 0}};
  const auto g = InteractionGraph::from_edges(2, 1, edges);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.item_degree(0), 2u);
}

TEST(InteractionGraph, ZeroDegreeRejected) {
  const std::vector<InteractionGraph::Edge> edges = {{0, 0}};
  const auto g = InteractionGraph::from_edges(2, 1, edges);
  EXPECT_THROW(g.validate(), Error);
}

TEST(Split, EightTwoDeterministic) {
  const auto ds = numbered(10);
  const SplitSpec spec{0.8, 7};
  const auto a = split(ds, spec);
  const auto b = split(ds, spec);
  EXPECT_EQ(a.train.size(), 8u);
  EXPECT_EQ(a.test.size(), 2u);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(split_manifest_json(spec, a), split_manifest_json(spec, b));
}

TEST(Split, FlooringRule) {
  const auto ds = numbered(10);
  // test = max(1, round(0.01 * 10)) = 1
  const auto s = split(ds, SplitSpec{0.99, 1});
  EXPECT_EQ(s.train.size(), 9u);
  EXPECT_EQ(s.test.size(), 1u);
  // round(0.95 * 10) = 10 leaves no train data
  EXPECT_THROW(split(ds, SplitSpec{0.05, 1}), Error);
  EXPECT_THROW(split(ds, SplitSpec{1.0, 1}), Error);
  EXPECT_THROW(split(ds, SplitSpec{0.0, 1}), Error);
}

TEST(Split, DisjointUnionKeepsOrder) {
  const auto ds = numbered(37);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = split(ds, SplitSpec{0.7, seed});
    std::set<ReviewId> seen;
    for (const auto& r : s.train.reviews()) EXPECT_TRUE(seen.insert(r.id).second);
    for (const auto& r : s.test.reviews()) EXPECT_TRUE(seen.insert(r.id).second);
    EXPECT_EQ(seen.size(), ds.size());
    const auto ordered = [](const Dataset& d) {
      return std::is_sorted(d.reviews().begin(), d.reviews().end(),
                            [](const Review& a, const Review& b) { return a.id < b.id; });
    };
    EXPECT_TRUE(ordered(s.train));
    EXPECT_TRUE(ordered(s.test));
  }
}

TEST(Split, ManifestShape) {
  const auto ds = numbered(5);
  const SplitSpec spec{0.6, 42};
  const auto s = split(ds, spec);
  const std::string j = split_manifest_json(spec, s);
  EXPECT_NE(j.find("\"seed\""), std::string::npos);
  EXPECT_NE(j.find("\"train\""), std::string::npos);
  EXPECT_NE(j.find("\"test\""), std::string::npos);
}

}  // namespace
