#include "memlab/protocol/order_study.hpp"

#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "memlab/error.hpp"
#include "memlab/random.hpp"
#include "memlab/stats/consistency.hpp"
#include "memlab/stats/rank.hpp"

namespace memlab::protocol {
namespace {

constexpr std::uint64_t kWithinSalt = 0x77697468696eULL;
constexpr std::uint64_t kCrossSalt = 0x63726f7373ULL;

std::vector<std::size_t> draw(std::size_t n, std::size_t k, Engine& engine) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(rows[i], rows[pick(engine)]);
  }
  rows.resize(k);
  return rows;
}

// Group means of `m` re-indexed onto `targets` (NaN where m lacks the target).
std::vector<double> aligned_means(const stats::ResponseMatrix& m, std::span<const std::size_t> rows,
                                  const std::vector<std::string>& targets) {
  const std::vector<double> means = m.group_means(rows);
  std::map<std::string_view, double> by_id;
  for (std::size_t j = 0; j < means.size(); ++j) by_id[m.target_ids()[j]] = means[j];
  std::vector<double> out(targets.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const auto it = by_id.find(targets[j]);
    if (it != by_id.end()) out[j] = it->second;
  }
  return out;
}

void summarize(RhoSummary& s) {
  const auto [mean, sd] = stats::mean_population_std(s.per_split_rhos);
  s.mean_rho = mean;
  s.sigma_rho = sd;
}

}  // namespace

OrderStudyReport order_study_report(const SequenceLibrary& sequences,
                                    const std::map<std::string, std::vector<SessionRecord>>& grouped, int group_size,
                                    int n_splits, std::uint64_t seed, const Attentiveness& attentiveness) {
  if (grouped.size() < 2) fail(ErrorCode::kInvalidInput, "order study needs at least two orders");
  if (group_size < 2) fail(ErrorCode::kInvalidInput, "group size must be at least 2");
  if (n_splits < 1) fail(ErrorCode::kInvalidInput, "number of splits must be at least 1");

  OrderStudyReport report;
  report.group_size = group_size;
  report.n_splits = n_splits;
  report.seed = seed;

  std::vector<stats::ResponseMatrix> matrices;
  std::set<std::string> all_targets;
  for (const auto& [order_id, sessions] : grouped) {
    AggregateResult agg = aggregate_scores(sequences, sessions, attentiveness);
    for (const auto& id : agg.matrix.target_ids()) all_targets.insert(id);
    report.order_ids.push_back(order_id);
    report.per_order_tables.push_back(std::move(agg.table));
    matrices.push_back(std::move(agg.matrix));
  }

  for (std::size_t o = 0; o < matrices.size(); ++o) {
    const auto within =
        stats::split_half_consistency(matrices[o], group_size, n_splits, derive_seed(seed ^ kWithinSalt, o));
    report.within_order.per_split_rhos.insert(report.within_order.per_split_rhos.end(),
                                              within.per_split_rhos.begin(), within.per_split_rhos.end());
    report.within_order.discarded_splits += within.discarded_splits;
  }
  summarize(report.within_order);

  const std::vector<std::string> targets(all_targets.begin(), all_targets.end());
  const auto k = static_cast<std::size_t>(group_size);
  const std::uint64_t cross_seed = seed ^ kCrossSalt;
  const int max_attempts = stats::kMaxAttemptsPerSplit * n_splits;
  int attempt = 0;
  while (static_cast<int>(report.cross_order.per_split_rhos.size()) < n_splits) {
    if (attempt == max_attempts) {
      fail(ErrorCode::kDegenerateInput, "cross-order pairings stayed degenerate after " + std::to_string(attempt) +
                                            " attempts");
    }
    Engine engine = make_engine(cross_seed, static_cast<std::uint64_t>(attempt++));
    std::uniform_int_distribution<std::size_t> pick_order(0, matrices.size() - 1);
    const std::size_t a = pick_order(engine);
    std::size_t b = pick_order(engine);
    while (b == a) b = pick_order(engine);
    const auto rows_a = draw(matrices[a].participant_count(), k, engine);
    const auto rows_b = draw(matrices[b].participant_count(), k, engine);
    const auto rho = stats::paired_spearman(aligned_means(matrices[a], rows_a, targets),
                                            aligned_means(matrices[b], rows_b, targets));
    if (!rho) {
      ++report.cross_order.discarded_splits;
      continue;
    }
    report.cross_order.per_split_rhos.push_back(*rho);
  }
  summarize(report.cross_order);
  return report;
}

}  // namespace memlab::protocol
