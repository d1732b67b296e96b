#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "rexha/graph_encoder.hpp"
#include "rexha/mocks.hpp"
#include "rexha/profiler.hpp"

namespace {

using namespace rexha::gcn;

InteractionGraph random_graph(std::uint32_t users, std::uint32_t items, std::size_t per_user) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::uint32_t> pick(0, items - 1);
  std::vector<InteractionGraph::Edge> edges;
  for (std::uint32_t u = 0; u < users; ++u) {
    edges.push_back({u, u % items});
    for (std::size_t k = 0; k < per_user; ++k) edges.push_back({u, pick(rng)});
  }
  for (std::uint32_t i = 0; i < items; ++i) edges.push_back({i % users, i});
  return InteractionGraph::from_edges(users, items, edges);
}

void BM_Propagate(benchmark::State& state) {
  const auto g = random_graph(static_cast<std::uint32_t>(state.range(0)), static_cast<std::uint32_t>(state.range(0) / 2), 20);
  const auto table = EmbeddingTable::random_normal(g, 64, 2, 0.1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(final_embeddings(g, table));
}
BENCHMARK(BM_Propagate)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_BuildTree(benchmark::State& state) {
  std::vector<std::string> texts;
  for (int k = 0; k < state.range(0); ++k) texts.push_back("Review " + std::to_string(k) + " was fine. More.");
  rexha::mock::FirstSentenceSummarizer mock;
  rexha::profiler::ProfilerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(rexha::profiler::build_tree(mock, texts, cfg, "x"));
}
BENCHMARK(BM_BuildTree)->Arg(16)->Arg(256);

}  // namespace
