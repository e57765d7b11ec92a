#pragma once

#include <span>
#include <vector>

namespace memlab::stats {

/// 1-based fractional ranks; tied values share the average of the ranks they
/// span, so the ranks always sum to n(n+1)/2.
using RankVector = std::vector<double>;

/// Throws InvalidInput on empty input or non-finite values.
RankVector rank_transform(std::span<const double> values);

/// Pearson product-moment correlation. Throws InvalidInput on length
/// mismatch, n < 2 or non-finite values; DegenerateInput when either side
/// has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman's rho: Pearson correlation of the fractional ranks.
double spearman(std::span<const double> x, std::span<const double> y);

/// Mean and population standard deviation (divide by n). Empty input gives {0, 0}.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_population_std(std::span<const double> values);

}  // namespace memlab::stats
