#include <benchmark/benchmark.h>

#include "memlab/protocol/sequence.hpp"
#include "memlab/protocol/simulate.hpp"

namespace {

void BM_GenerateSequence(benchmark::State& state) {
  std::vector<std::string> targets;
  for (int i = 0; i < 45; ++i) targets.push_back("t" + std::to_string(i));
  const auto pool = memlab::protocol::synthetic_pool(targets, 65, 10);
  memlab::protocol::SequenceParams params;
  params.n_vigilance = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(memlab::protocol::generate_sequence(pool, params, ++seed));
}
BENCHMARK(BM_GenerateSequence)->Arg(0)->Arg(10);

}  // namespace
