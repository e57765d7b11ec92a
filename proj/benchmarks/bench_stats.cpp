#include <benchmark/benchmark.h>

#include <algorithm>
#include <map>
#include <random>

#include "memlab/protocol/scoring.hpp"
#include "memlab/protocol/simulate.hpp"
#include "memlab/stats/consistency.hpp"
#include "memlab/stats/rank.hpp"

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

void BM_Spearman(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_vector(n, 1);
  const auto y = random_vector(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(memlab::stats::spearman(x, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Spearman)->RangeMultiplier(4)->Range(64, 65536)->Complexity();

memlab::stats::ResponseMatrix simulated_matrix(int items, int participants) {
  std::map<std::string, double> truth;
  std::mt19937_64 gen(3);
  std::normal_distribution<double> draw(0.66, 0.14);
  for (int i = 0; i < items; ++i) truth["item-" + std::to_string(i)] = std::clamp(draw(gen), 0.0, 1.0);
  const auto sim = memlab::protocol::simulate_sessions(truth, participants, {}, {}, {}, 4);
  return memlab::protocol::aggregate_scores(sim.sequences, sim.sessions).matrix;
}

void BM_SplitHalf(benchmark::State& state) {
  const auto m = simulated_matrix(45, 270);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(memlab::stats::split_half_consistency(m, k, 100, 7));
}
BENCHMARK(BM_SplitHalf)->Arg(40)->Arg(100)->Arg(135)->Unit(benchmark::kMillisecond);

}  // namespace
