#include "memlab/gbt/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>

#include "memlab/error.hpp"
#include "memlab/gbt/split.hpp"
#include "memlab/random.hpp"

namespace memlab::gbt {
namespace {

constexpr std::uint64_t kHoldoutStream = 0x686f6c646f7574ULL;

using Row = std::uint32_t;

/// First k entries of a uniform random permutation of 0..n-1.
std::vector<Row> sample(std::size_t n, std::size_t k, Engine& engine) {
  std::vector<Row> idx(n);
  std::iota(idx.begin(), idx.end(), Row{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(engine)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::size_t sample_count(double fraction, std::size_t n) {
  if (fraction >= 1.0) return n;
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n))), 1, n);
}

struct Matrix {
  std::size_t d = 0;
  std::vector<double> v;
  double at(std::size_t r, std::size_t c) const { return v[r * d + c]; }
  std::span<const double> row(std::size_t r) const { return {v.data() + r * d, d}; }
};

struct Pending {
  std::int32_t node = 0;
  std::vector<Row> rows;  // ascending row index
};

struct Best {
  std::size_t feature = 0;
  SplitCandidate split;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const std::vector<std::vector<Row>>& sorted, const std::vector<std::vector<Row>>& missing,
              const GbtParams& params, std::size_t n_rows)
      : x_(x), sorted_(sorted), missing_(missing), params_(params), node_of_(n_rows, -1) {
    settings_ = {params.lambda, params.gamma, params.min_child_weight};
  }

  Tree grow(std::vector<Row> rows, std::span<const std::size_t> columns, std::span<const double> g) {
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<Pending> level;
    level.push_back({0, std::move(rows)});
    for (int depth = 0; !level.empty(); ++depth) {
      std::vector<double> g_tot(level.size(), 0.0);
      std::vector<double> h_tot(level.size(), 0.0);
      for (std::size_t k = 0; k < level.size(); ++k) {
        for (Row r : level[k].rows) {
          g_tot[k] += g[r];
          h_tot[k] += 1.0;
        }
      }
      std::vector<std::optional<Best>> best(level.size());
      if (depth < params_.max_depth) find_splits(level, columns, g, g_tot, h_tot, best);

      std::vector<Pending> next;
      for (std::size_t k = 0; k < level.size(); ++k) {
        auto& node_index = level[k].node;
        if (!best[k]) {
          tree.nodes[static_cast<std::size_t>(node_index)].weight = leaf_weight(g_tot[k], h_tot[k], params_.lambda);
          continue;
        }
        const Best& b = *best[k];
        Pending left{static_cast<std::int32_t>(tree.nodes.size()), {}};
        Pending right{static_cast<std::int32_t>(tree.nodes.size() + 1), {}};
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        TreeNode& n = tree.nodes[static_cast<std::size_t>(node_index)];
        n.feature = static_cast<std::int32_t>(b.feature);
        n.threshold = b.split.threshold;
        n.default_left = b.split.default_left;
        n.left = left.node;
        n.right = right.node;
        for (Row r : level[k].rows) {
          const double v = x_.at(r, b.feature);
          const bool go_left = is_missing(v) ? n.default_left : v < n.threshold;
          (go_left ? left : right).rows.push_back(r);
        }
        next.push_back(std::move(left));
        next.push_back(std::move(right));
      }
      level = std::move(next);
    }
    return tree;
  }

 private:
  void find_splits(const std::vector<Pending>& level, std::span<const std::size_t> columns, std::span<const double> g,
                   const std::vector<double>& g_tot, const std::vector<double>& h_tot,
                   std::vector<std::optional<Best>>& best) {
    for (std::size_t k = 0; k < level.size(); ++k) {
      for (Row r : level[k].rows) node_of_[r] = static_cast<std::int32_t>(k);
    }
    std::vector<std::vector<double>> vals(level.size());
    std::vector<std::vector<double>> gs(level.size());
    std::vector<std::vector<double>> hs(level.size());
    std::vector<double> mg(level.size());
    std::vector<double> mh(level.size());
    for (std::size_t f : columns) {
      for (std::size_t k = 0; k < level.size(); ++k) {
        vals[k].clear();
        gs[k].clear();
        hs[k].clear();
        mg[k] = 0.0;
        mh[k] = 0.0;
      }
      for (Row r : sorted_[f]) {
        const std::int32_t k = node_of_[r];
        if (k < 0) continue;
        vals[static_cast<std::size_t>(k)].push_back(x_.at(r, f));
        gs[static_cast<std::size_t>(k)].push_back(g[r]);
        hs[static_cast<std::size_t>(k)].push_back(1.0);
      }
      for (Row r : missing_[f]) {
        const std::int32_t k = node_of_[r];
        if (k < 0) continue;
        mg[static_cast<std::size_t>(k)] += g[r];
        mh[static_cast<std::size_t>(k)] += 1.0;
      }
      for (std::size_t k = 0; k < level.size(); ++k) {
        auto cand = best_split_with_totals(vals[k], gs[k], hs[k], settings_, g_tot[k], h_tot[k], mg[k], mh[k]);
        if (cand && (!best[k] || cand->gain > best[k]->split.gain)) best[k] = Best{f, *cand};
      }
    }
    for (const auto& p : level) {
      for (Row r : p.rows) node_of_[r] = -1;
    }
  }

  const Matrix& x_;
  const std::vector<std::vector<Row>>& sorted_;
  const std::vector<std::vector<Row>>& missing_;
  const GbtParams& params_;
  SplitSettings settings_;
  std::vector<std::int32_t> node_of_;
};

double mse(std::span<const Row> rows, std::span<const double> sums, double base, double eta, std::span<const double> y) {
  double acc = 0.0;
  for (Row r : rows) {
    const double e = base + eta * sums[r] - y[r];
    acc += e * e;
  }
  return rows.empty() ? 0.0 : acc / static_cast<double>(rows.size());
}

}  // namespace

GbtModel train(const FeatureMatrix& x, std::span<const double> y, const GbtParams& params, TrainingTrace* trace) {
  params.validate();
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2) fail(ErrorCode::kInvalidInput, "training needs at least two rows");
  if (y.size() != n) {
    fail(ErrorCode::kInvalidInput, "got " + std::to_string(y.size()) + " labels for " + std::to_string(n) + " rows");
  }
  for (double v : y) {
    if (!std::isfinite(v)) fail(ErrorCode::kInvalidInput, "labels must be finite");
  }

  std::vector<Row> train_rows(n);
  std::iota(train_rows.begin(), train_rows.end(), Row{0});
  std::vector<Row> valid_rows;
  if (params.early_stopping_rounds > 0) {
    const std::size_t n_valid = sample_count(params.validation_fraction, n);
    if (n - n_valid < 2) fail(ErrorCode::kInvalidInput, "too few rows left for training after the holdout");
    Engine engine = make_engine(params.seed, kHoldoutStream);
    valid_rows = sample(n, n_valid, engine);
    std::vector<Row> rest;
    std::set_difference(train_rows.begin(), train_rows.end(), valid_rows.begin(), valid_rows.end(),
                        std::back_inserter(rest));
    train_rows = std::move(rest);
  }

  FeatureScaling scaling;
  if (params.standardize) {
    std::vector<std::size_t> idx(train_rows.begin(), train_rows.end());
    scaling = FeatureScaling::fit(x.select_rows(idx));
  }
  Matrix xs{d, {x.values().begin(), x.values().end()}};
  if (!scaling.empty()) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < d; ++c) xs.v[r * d + c] = scaling.apply(c, xs.v[r * d + c]);
    }
  }

  double base = 0.0;
  if (params.base_score) {
    base = *params.base_score;
  } else {
    for (Row r : train_rows) base += y[r];
    base /= static_cast<double>(train_rows.size());
  }

  std::vector<std::vector<Row>> sorted(d);
  std::vector<std::vector<Row>> missing(d);
  for (std::size_t f = 0; f < d; ++f) {
    for (Row r : train_rows) (is_missing(xs.at(r, f)) ? missing[f] : sorted[f]).push_back(r);
    std::stable_sort(sorted[f].begin(), sorted[f].end(),
                     [&](Row a, Row b) { return xs.at(a, f) < xs.at(b, f); });
  }

  const double eta = params.learning_rate;
  std::vector<double> sums(n, 0.0);
  std::vector<double> grad(n, 0.0);
  std::vector<Tree> trees;
  TrainingTrace local;
  local.initial_mse = mse(train_rows, sums, base, eta, y);
  double best_valid = mse(valid_rows, sums, base, eta, y);
  std::size_t best_count = 0;

  TreeBuilder builder(xs, sorted, missing, params, n);
  std::vector<std::size_t> all_columns(d);
  std::iota(all_columns.begin(), all_columns.end(), std::size_t{0});
  for (int round = 0; round < params.n_rounds; ++round) {
    Engine engine = make_engine(params.seed, static_cast<std::uint64_t>(round));
    std::vector<Row> rows;
    if (params.subsample < 1.0) {
      for (Row i : sample(train_rows.size(), sample_count(params.subsample, train_rows.size()), engine)) {
        rows.push_back(train_rows[i]);
      }
    } else {
      rows = train_rows;
    }
    std::vector<std::size_t> columns = all_columns;
    if (params.colsample < 1.0 && d > 0) {
      columns.clear();
      for (Row c : sample(d, sample_count(params.colsample, d), engine)) columns.push_back(c);
    }
    for (Row r : train_rows) grad[r] = base + eta * sums[r] - y[r];

    trees.push_back(builder.grow(std::move(rows), columns, grad));
    for (std::size_t r = 0; r < n; ++r) sums[r] += trees.back().evaluate(xs.row(r));
    local.train_mse.push_back(mse(train_rows, sums, base, eta, y));

    if (params.early_stopping_rounds > 0) {
      const double v = mse(valid_rows, sums, base, eta, y);
      local.validation_mse.push_back(v);
      if (v < best_valid) {
        best_valid = v;
        best_count = trees.size();
      } else if (trees.size() - best_count >= static_cast<std::size_t>(params.early_stopping_rounds)) {
        break;
      }
    } else {
      best_count = trees.size();
    }
  }
  trees.resize(best_count);
  local.best_round = static_cast<int>(best_count);
  if (trace) *trace = std::move(local);
  return GbtModel(d, base, params, std::move(scaling), std::move(trees));
}

}  // namespace memlab::gbt
