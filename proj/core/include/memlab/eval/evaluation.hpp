#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "memlab/gbt/feature_matrix.hpp"
#include "memlab/gbt/model.hpp"
#include "memlab/protocol/types.hpp"
#include "memlab/stats/consistency.hpp"
#include "memlab/stats/response_matrix.hpp"

namespace memlab::eval {

/// Ground-truth or predicted score per item id.
using ItemScores = std::map<std::string, double, std::less<>>;

ItemScores scores_from_table(const protocol::MemorabilityTable& table);

struct EvalConfig {
  int n_splits = 25;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;

  /// Throws InvalidInput unless n_splits >= 1 and 0 < test_fraction < 1.
  void validate() const;
  bool operator==(const EvalConfig&) const = default;
};

/// Row indices into the feature matrix, both ascending and disjoint; together
/// they cover every row.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  bool operator==(const Split&) const = default;
};

/// Random train/test partition of n rows with round(test_fraction * n) test
/// rows, kept within [2, n - 2]. Throws InvalidInput when n < 4.
Split make_split(std::size_t n, double test_fraction, std::uint64_t seed);

struct EvalReport {
  std::string name;
  EvalConfig config;
  gbt::GbtParams params;
  std::vector<double> per_split_rho;        // Spearman(prediction, truth) on the test rows
  std::vector<double> per_split_train_rho;  // same on the training rows; NaN if predictions are constant
  std::vector<Split> splits;                // the accepted splits, in order
  double mean_rho = 0.0;
  double sigma_rho = 0.0;  // population std
  int resampled_splits = 0;  // draws rejected because a test ranking was constant
};

/// Repeated random-split protocol: train on the training rows, predict the
/// test rows, score with Spearman. Attempt a draws its split from
/// derive_seed(config.seed, a); a draw whose test predictions or truths are
/// constant is rejected and redrawn, at most 10 * n_splits attempts in total.
///
/// Throws InvalidInput unless `x` and `truth` cover the same items and there
/// are at least 10 of them; DegenerateInput when the attempt budget runs out.
EvalReport eval_protocol(const gbt::FeatureMatrix& x, const ItemScores& truth, const gbt::GbtParams& params,
                         const EvalConfig& config, std::string name = {});

inline constexpr std::size_t kMinEvalItems = 10;

struct NamedFeatures {
  std::string name;
  gbt::FeatureMatrix features;
};

/// One report per feature set, best mean_rho first; equal means are ordered
/// by name.
std::vector<EvalReport> compare_feature_sets(std::span<const NamedFeatures> sets, const ItemScores& truth,
                                             const gbt::GbtParams& params, const EvalConfig& config);

struct ErrorDiffItem {
  std::string item_id;
  double truth = 0.0;
  double difference = 0.0;  // |a - truth| - |b - truth|; negative means A is closer
};

struct ErrorDiffBin {
  double lo = 0.0;
  double hi = 0.0;  // [lo, hi), the last bin also includes hi
  int a_better = 0;
  int b_better = 0;
  int ties = 0;
};

struct ErrorDiffReport {
  std::vector<ErrorDiffItem> items;  // sorted by item id
  std::vector<ErrorDiffBin> bins;
  int unbinned = 0;  // items whose truth falls outside the edges
};

/// 0, 0.05, ..., 1.
std::vector<double> default_bin_edges();

/// Per-item prediction error difference between predictors A and B, binned by
/// true score. Throws InvalidInput unless all three maps have the same keys
/// and the edges are at least two strictly increasing finite values.
ErrorDiffReport error_difference(const ItemScores& a, const ItemScores& b, const ItemScores& truth,
                                 std::span<const double> bin_edges);

/// Split-half consistency at the largest group size, floor(N / 2).
stats::ConsistencyReport human_upper_bound(const stats::ResponseMatrix& m, int n_splits, std::uint64_t seed);

}  // namespace memlab::eval
