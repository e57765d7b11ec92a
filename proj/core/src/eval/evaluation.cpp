#include "memlab/eval/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "memlab/error.hpp"
#include "memlab/gbt/train.hpp"
#include "memlab/random.hpp"
#include "memlab/stats/rank.hpp"

namespace memlab::eval {
namespace {

bool is_constant(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

std::vector<double> pick(std::span<const double> v, std::span<const std::size_t> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(v[r]);
  return out;
}

}  // namespace

ItemScores scores_from_table(const protocol::MemorabilityTable& table) {
  ItemScores out;
  for (const auto& row : table.rows) out.emplace(row.item_id, row.score);
  return out;
}

void EvalConfig::validate() const {
  if (n_splits < 1) fail(ErrorCode::kInvalidInput, "n_splits must be >= 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) fail(ErrorCode::kInvalidInput, "test_fraction must be in (0, 1)");
}

Split make_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (n < 4) fail(ErrorCode::kInvalidInput, "a train/test split needs at least 4 items");
  const auto wanted = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(n)));
  const std::size_t n_test = std::clamp<std::size_t>(wanted, 2, n - 2);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Engine engine(seed);
  for (std::size_t i = 0; i < n_test; ++i) {
    std::uniform_int_distribution<std::size_t> choose(i, n - 1);
    std::swap(idx[i], idx[choose(engine)]);
  }
  Split s;
  s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

EvalReport eval_protocol(const gbt::FeatureMatrix& x, const ItemScores& truth, const gbt::GbtParams& params,
                         const EvalConfig& config, std::string name) {
  config.validate();
  params.validate();
  const std::size_t n = x.rows();
  if (truth.size() != n) {
    fail(ErrorCode::kInvalidInput, "features cover " + std::to_string(n) + " items but ground truth covers " +
                                       std::to_string(truth.size()));
  }
  std::vector<double> y;
  y.reserve(n);
  for (const auto& id : x.item_ids()) {
    const auto it = truth.find(id);
    if (it == truth.end()) fail(ErrorCode::kInvalidInput, "item '" + id + "' has features but no ground truth");
    y.push_back(it->second);
  }
  if (n < kMinEvalItems) {
    fail(ErrorCode::kInvalidInput, "evaluation needs at least " + std::to_string(kMinEvalItems) + " items");
  }

  EvalReport report;
  report.name = std::move(name);
  report.config = config;
  report.params = params;
  const int max_attempts = 10 * config.n_splits;
  for (int attempt = 0; static_cast<int>(report.per_split_rho.size()) < config.n_splits; ++attempt) {
    if (attempt >= max_attempts) {
      fail(ErrorCode::kDegenerateInput, "no usable train/test split after " + std::to_string(max_attempts) +
                                            " attempts; the test rankings keep coming out constant");
    }
    Split split = make_split(n, config.test_fraction, derive_seed(config.seed, static_cast<std::uint64_t>(attempt)));
    const std::vector<double> y_test = pick(y, split.test);
    if (is_constant(y_test)) {
      ++report.resampled_splits;
      continue;
    }
    const std::vector<double> y_train = pick(y, split.train);
    const gbt::GbtModel model = gbt::train(x.select_rows(split.train), y_train, params);
    const std::vector<double> pred_test = model.predict(x.select_rows(split.test));
    if (is_constant(pred_test)) {
      ++report.resampled_splits;
      continue;
    }
    const std::vector<double> pred_train = model.predict(x.select_rows(split.train));
    report.per_split_rho.push_back(stats::spearman(pred_test, y_test));
    report.per_split_train_rho.push_back(is_constant(pred_train) || is_constant(y_train)
                                             ? std::numeric_limits<double>::quiet_NaN()
                                             : stats::spearman(pred_train, y_train));
    report.splits.push_back(std::move(split));
  }
  const auto summary = stats::mean_population_std(report.per_split_rho);
  report.mean_rho = summary.mean;
  report.sigma_rho = summary.std;
  return report;
}

std::vector<EvalReport> compare_feature_sets(std::span<const NamedFeatures> sets, const ItemScores& truth,
                                             const gbt::GbtParams& params, const EvalConfig& config) {
  if (sets.size() < 2) fail(ErrorCode::kInvalidInput, "comparison needs at least two feature sets");
  std::vector<EvalReport> reports;
  reports.reserve(sets.size());
  for (const auto& s : sets) reports.push_back(eval_protocol(s.features, truth, params, config, s.name));
  std::stable_sort(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) {
    if (a.mean_rho != b.mean_rho) return a.mean_rho > b.mean_rho;
    return a.name < b.name;
  });
  return reports;
}

std::vector<double> default_bin_edges() {
  std::vector<double> edges;
  for (int i = 0; i <= 20; ++i) edges.push_back(i / 20.0);
  return edges;
}

ErrorDiffReport error_difference(const ItemScores& a, const ItemScores& b, const ItemScores& truth,
                                 std::span<const double> bin_edges) {
  if (bin_edges.size() < 2) fail(ErrorCode::kInvalidInput, "need at least two bin edges");
  for (std::size_t i = 0; i < bin_edges.size(); ++i) {
    if (!std::isfinite(bin_edges[i]) || (i > 0 && !(bin_edges[i] > bin_edges[i - 1]))) {
      fail(ErrorCode::kInvalidInput, "bin edges must be finite and strictly increasing");
    }
  }
  if (a.size() != truth.size() || b.size() != truth.size()) {
    fail(ErrorCode::kInvalidInput, "predictions and ground truth cover different item sets");
  }
  ErrorDiffReport report;
  for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i) report.bins.push_back({bin_edges[i], bin_edges[i + 1]});
  for (const auto& [id, t] : truth) {
    const auto ia = a.find(id);
    const auto ib = b.find(id);
    if (ia == a.end() || ib == b.end()) fail(ErrorCode::kInvalidInput, "item '" + id + "' lacks a prediction");
    const double diff = std::abs(ia->second - t) - std::abs(ib->second - t);
    if (!std::isfinite(diff)) fail(ErrorCode::kInvalidInput, "non-finite score for item '" + id + "'");
    report.items.push_back({id, t, diff});
    if (t < bin_edges.front() || t > bin_edges.back()) {
      ++report.unbinned;
      continue;
    }
    const auto pos = std::upper_bound(bin_edges.begin(), bin_edges.end(), t);
    std::size_t bin = static_cast<std::size_t>(pos - bin_edges.begin()) - 1;
    bin = std::min(bin, report.bins.size() - 1);
    ErrorDiffBin& target = report.bins[bin];
    if (diff < 0.0) {
      ++target.a_better;
    } else if (diff > 0.0) {
      ++target.b_better;
    } else {
      ++target.ties;
    }
  }
  return report;
}

stats::ConsistencyReport human_upper_bound(const stats::ResponseMatrix& m, int n_splits, std::uint64_t seed) {
  const auto k = static_cast<int>(m.participant_count() / 2);
  return stats::split_half_consistency(m, k, n_splits, seed);
}

}  // namespace memlab::eval
