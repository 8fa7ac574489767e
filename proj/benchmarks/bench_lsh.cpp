#include <benchmark/benchmark.h>

#include <random>

#include "srcvul/detector.hpp"
#include "srcvul/lsh_index.hpp"

using namespace srcvul;

namespace {

std::map<std::string, SlicingVector> random_vectors(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::map<std::string, SlicingVector> out;
  for (std::size_t k = 0; k < n; ++k) {
    SlicingVector v;
    for (double& x : v.dims) x = u(rng) + 1e-6;
    out["v" + std::to_string(k)] = v;
  }
  return out;
}

void BM_LshBuild(benchmark::State& state) {
  const auto entries = random_vectors(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(LshIndex::build(entries));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LshBuild)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_LshQuery(benchmark::State& state) {
  const LshIndex index = LshIndex::build(random_vectors(static_cast<std::size_t>(state.range(0)), 2));
  const auto probes = random_vectors(256, 3);
  auto it = probes.begin();
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.query(it->second));
    if (++it == probes.end()) it = probes.begin();
  }
}
BENCHMARK(BM_LshQuery)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_MatchLshVersusExhaustive(benchmark::State& state) {
  DetectorConfig cfg;
  cfg.brute_force = state.range(1) != 0;
  const VectorMatcher matcher(random_vectors(static_cast<std::size_t>(state.range(0)), 4), cfg);
  const auto probes = random_vectors(256, 5);
  auto it = probes.begin();
  for (auto _ : state) {
    benchmark::DoNotOptimize(matcher.match(it->second));
    if (++it == probes.end()) it = probes.begin();
  }
}
BENCHMARK(BM_MatchLshVersusExhaustive)->Args({10000, 0})->Args({10000, 1});

}  // namespace
