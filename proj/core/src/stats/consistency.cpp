#include "memlab/stats/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "memlab/error.hpp"
#include "memlab/random.hpp"
#include "memlab/stats/rank.hpp"

namespace memlab::stats {
namespace {

constexpr std::uint64_t kVarianceSalt = 0x76617269616e6365ULL;

std::vector<std::size_t> draw_participants(std::size_t n, std::size_t k, Engine& engine) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  // partial Fisher-Yates: the first k slots end up a uniform k-subset
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(all[i], all[pick(engine)]);
  }
  all.resize(k);
  return all;
}

bool is_constant(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

}  // namespace

std::optional<double> paired_spearman(std::span<const double> a, std::span<const double> b) {
  std::vector<double> xa;
  std::vector<double> xb;
  const std::size_t n = std::min(a.size(), b.size());
  xa.reserve(n);
  xb.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(a[i]) && std::isfinite(b[i])) {
      xa.push_back(a[i]);
      xb.push_back(b[i]);
    }
  }
  if (xa.size() < 2 || is_constant(xa) || is_constant(xb)) return std::nullopt;
  return spearman(xa, xb);
}

ConsistencyReport split_half_consistency(const ResponseMatrix& m, int group_size, int n_splits, std::uint64_t seed) {
  if (group_size < 2) fail(ErrorCode::kInvalidInput, "group size must be at least 2");
  if (n_splits < 1) fail(ErrorCode::kInvalidInput, "number of splits must be at least 1");
  const std::size_t n = m.participant_count();
  const auto k = static_cast<std::size_t>(group_size);
  if (2 * k > n) {
    fail(ErrorCode::kInsufficientParticipants, "split-half at K=" + std::to_string(group_size) + " needs " +
                                                   std::to_string(2 * k) + " participants, have " +
                                                   std::to_string(n));
  }

  ConsistencyReport report;
  report.group_size = group_size;
  report.n_splits = n_splits;
  report.subsampled = 2 * k < n;
  report.seed = seed;
  report.per_split_rhos.reserve(static_cast<std::size_t>(n_splits));

  const int max_attempts = kMaxAttemptsPerSplit * n_splits;
  int attempt = 0;
  while (static_cast<int>(report.per_split_rhos.size()) < n_splits) {
    if (attempt == max_attempts) {
      fail(ErrorCode::kDegenerateInput, "split-half at K=" + std::to_string(group_size) + ": " +
                                            std::to_string(report.discarded_splits) +
                                            " degenerate draws, gave up after " + std::to_string(attempt));
    }
    Engine engine = make_engine(seed, static_cast<std::uint64_t>(attempt++));
    const auto drawn = draw_participants(n, 2 * k, engine);
    const std::span<const std::size_t> first(drawn.data(), k);
    const std::span<const std::size_t> second(drawn.data() + k, k);
    const auto rho = paired_spearman(m.group_means(first), m.group_means(second));
    if (!rho) {
      ++report.discarded_splits;
      continue;
    }
    report.per_split_rhos.push_back(*rho);
  }

  const auto [mean, sd] = mean_population_std(report.per_split_rhos);
  report.mean_rho = mean;
  report.sigma_rho = sd;
  return report;
}

std::uint64_t curve_seed(std::uint64_t master, int group_size) noexcept {
  return derive_seed(master, static_cast<std::uint64_t>(group_size));
}

std::vector<ConsistencyReport> consistency_curve(const ResponseMatrix& m, std::span<const int> group_sizes,
                                                 int n_splits, std::uint64_t seed) {
  std::vector<ConsistencyReport> reports;
  reports.reserve(group_sizes.size());
  for (int k : group_sizes) reports.push_back(split_half_consistency(m, k, n_splits, curve_seed(seed, k)));
  return reports;
}

std::vector<VarianceCurve> group_variance_analysis(const ResponseMatrix& m, std::span<const int> group_sizes,
                                                   int n_groups, std::uint64_t seed) {
  if (n_groups < 2) fail(ErrorCode::kInvalidInput, "variance analysis needs at least 2 groups");
  const std::size_t n = m.participant_count();
  const std::size_t t = m.target_count();

  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
  const std::vector<double> overall = m.group_means(all_rows);
  const std::vector<std::size_t> observers = m.observer_counts();

  std::vector<VarianceCurve> curves;
  curves.reserve(group_sizes.size());
  for (int group_size : group_sizes) {
    if (group_size < 1) fail(ErrorCode::kInvalidInput, "group size must be positive");
    const auto k = static_cast<std::size_t>(group_size);
    if (k > n) {
      fail(ErrorCode::kInsufficientParticipants, "group of " + std::to_string(k) + " from " + std::to_string(n) +
                                                     " participants");
    }
    VarianceCurve curve;
    curve.group_size = group_size;
    curve.n_groups = n_groups;
    curve.seed = derive_seed(seed ^ kVarianceSalt, k);

    // Welford accumulators per target over groups that observed it.
    std::vector<double> count(t, 0.0);
    std::vector<double> mean(t, 0.0);
    std::vector<double> m2(t, 0.0);
    for (int g = 0; g < n_groups; ++g) {
      Engine engine = make_engine(curve.seed, static_cast<std::uint64_t>(g));
      const auto rows = draw_participants(n, k, engine);
      const auto means = m.group_means(rows);
      for (std::size_t j = 0; j < t; ++j) {
        if (!std::isfinite(means[j])) continue;
        count[j] += 1.0;
        const double delta = means[j] - mean[j];
        mean[j] += delta / count[j];
        m2[j] += delta * (means[j] - mean[j]);
      }
    }

    for (std::size_t j = 0; j < t; ++j) {
      if (observers[j] == 0) continue;
      VariancePoint point;
      point.item_id = m.target_ids()[j];
      point.mean_score = overall[j];
      point.n_observers = observers[j];
      point.across_group_variance = count[j] > 1.0 ? m2[j] / (count[j] - 1.0) : 0.0;
      const double pool = static_cast<double>(observers[j]);
      const double per_group = static_cast<double>(k) * pool / static_cast<double>(n);
      point.corrected_variance =
          pool > per_group ? point.across_group_variance * (pool - 1.0) / (pool - per_group) : point.across_group_variance;
      curve.points.push_back(std::move(point));
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace memlab::stats
