#include "memlab/stats/rank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "memlab/error.hpp"

namespace memlab::stats {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::kInvalidInput, std::string(what) + " contains a non-finite value");
  }
}

}  // namespace

RankVector rank_transform(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::kInvalidInput, "rank_transform of an empty sequence");
  require_finite(values, "rank_transform input");

  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  RankVector ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold 1-based ranks i+1..j; their average is (i+1+j)/2
    const double shared = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = shared;
    i = j;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    fail(ErrorCode::kInvalidInput, "correlation of sequences with lengths " + std::to_string(x.size()) +
                                       " and " + std::to_string(y.size()));
  }
  if (x.size() < 2) fail(ErrorCode::kInvalidInput, "correlation needs at least two pairs");
  require_finite(x, "x");
  require_finite(y, "y");

  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorCode::kDegenerateInput, "correlation of a constant sequence");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    fail(ErrorCode::kInvalidInput, "spearman of sequences with lengths " + std::to_string(x.size()) + " and " +
                                       std::to_string(y.size()));
  }
  if (x.size() < 2) fail(ErrorCode::kInvalidInput, "spearman needs at least two pairs");
  const RankVector rx = rank_transform(x);
  const RankVector ry = rank_transform(y);
  return pearson(rx, ry);
}

MeanStd mean_population_std(std::span<const double> values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

}  // namespace memlab::stats
