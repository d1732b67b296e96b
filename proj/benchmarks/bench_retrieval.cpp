#include <benchmark/benchmark.h>

#include "rexha/evalkit.hpp"
#include "rexha/retrieval.hpp"

namespace {

using namespace rexha::retrieval;

void BM_TopQ(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const auto index = random_index(rows, dim, 1);
  const auto queries = random_queries(64, dim, 2);
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(retrieve_top_q(index, queries[k++ % queries.size()], 8));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows));
}
BENCHMARK(BM_TopQ)->Args({10000, 384})->Args({100000, 768})->Unit(benchmark::kMillisecond);

void BM_LatentQuery(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto user = random_queries(n, 768, 3);
  const auto item = random_queries(n, 768, 4);
  for (auto _ : state) benchmark::DoNotOptimize(latent_query(user, item));
}
BENCHMARK(BM_LatentQuery)->Arg(8)->Arg(256);

void BM_BertScore(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<rexha::eval::Vector> ref, cand;
  for (const auto& u : random_queries(n, 256, 5)) ref.push_back(u.vector());
  for (const auto& u : random_queries(n, 256, 6)) cand.push_back(u.vector());
  for (auto _ : state) benchmark::DoNotOptimize(rexha::eval::bertscore(ref, cand));
}
BENCHMARK(BM_BertScore)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
