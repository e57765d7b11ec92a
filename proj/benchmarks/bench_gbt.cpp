#include <benchmark/benchmark.h>

#include <random>

#include "memlab/gbt/train.hpp"

namespace {

struct Data {
  memlab::gbt::FeatureMatrix x;
  std::vector<double> y;
};

Data make_data(std::size_t n, std::size_t d) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> ids;
  std::vector<double> values(n * d);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(std::to_string(i));
    for (std::size_t j = 0; j < d; ++j) values[i * d + j] = u(gen);
    y[i] = values[i * d] + 0.5 * values[i * d + 1] + 0.1 * u(gen);
  }
  return {memlab::gbt::FeatureMatrix(std::move(ids), d, std::move(values)), std::move(y)};
}

void BM_Train(benchmark::State& state) {
  const auto data = make_data(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  memlab::gbt::GbtParams params;
  params.n_rounds = 100;
  params.max_depth = 4;
  for (auto _ : state) benchmark::DoNotOptimize(memlab::gbt::train(data.x, data.y, params));
}
BENCHMARK(BM_Train)->Args({500, 8})->Args({2000, 32})->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const auto data = make_data(2000, 32);
  memlab::gbt::GbtParams params;
  params.n_rounds = 100;
  const auto model = memlab::gbt::train(data.x, data.y, params);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(data.x));
}
BENCHMARK(BM_Predict)->Unit(benchmark::kMillisecond);

}  // namespace
