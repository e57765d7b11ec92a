#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memlab/stats/response_matrix.hpp"

namespace memlab::stats {

/// Split-half consistency at one group size.
struct ConsistencyReport {
  int group_size = 0;
  int n_splits = 0;
  double mean_rho = 0.0;
  double sigma_rho = 0.0;  // population std over per_split_rhos
  std::vector<double> per_split_rhos;
  int discarded_splits = 0;  // degenerate draws that were resampled
  bool subsampled = false;   // 2K < participant count, so each split drew a subset
  std::uint64_t seed = 0;
};

/// Maximum draw attempts per accepted split before giving up with DegenerateInput.
inline constexpr int kMaxAttemptsPerSplit = 10;

/// Spearman rho between two score vectors over the positions where both are
/// finite. nullopt when fewer than two positions remain or either side is
/// constant.
std::optional<double> paired_spearman(std::span<const double> a, std::span<const double> b);

/// For each of `n_splits` splits: draw 2K participants without replacement,
/// split them into two disjoint groups of K, and correlate the per-target
/// group hit rates. Split i uses the stream derive_seed(seed, attempt).
ConsistencyReport split_half_consistency(const ResponseMatrix& m, int group_size, int n_splits, std::uint64_t seed);

/// Seed used for group size K inside consistency_curve.
std::uint64_t curve_seed(std::uint64_t master, int group_size) noexcept;

std::vector<ConsistencyReport> consistency_curve(const ResponseMatrix& m, std::span<const int> group_sizes,
                                                 int n_splits, std::uint64_t seed);

struct VariancePoint {
  std::string item_id;
  double mean_score = 0.0;             // hit rate over every observer
  double across_group_variance = 0.0;  // unbiased variance of the group means
  /// across_group_variance scaled by (n-1)/(n-k) to undo the finite-pool
  /// shrinkage of drawing k of n observers without replacement; estimates the
  /// variance of a fresh group's mean.
  double corrected_variance = 0.0;
  std::size_t n_observers = 0;
};

struct VarianceCurve {
  int group_size = 0;
  int n_groups = 0;
  std::uint64_t seed = 0;
  std::vector<VariancePoint> points;  // one per target with at least one observer
};

/// For each K: draw `n_groups` independent groups of K distinct participants
/// and measure, per target, the variance of the group hit rate across groups.
std::vector<VarianceCurve> group_variance_analysis(const ResponseMatrix& m, std::span<const int> group_sizes,
                                                   int n_groups, std::uint64_t seed);

}  // namespace memlab::stats
