#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <numeric>
#include <random>

#include "memlab/error.hpp"
#include "memlab/gbt/train.hpp"
#include "memlab/stats/rank.hpp"
#include "oracles.hpp"

namespace {

using namespace memlab;
using namespace memlab::gbt;

FeatureMatrix random_x(std::mt19937_64& gen, int n, int d) {
  std::normal_distribution<double> normal;
  std::vector<std::string> ids;
  std::vector<double> v;
  for (int i = 0; i < n; ++i) {
    ids.push_back("r" + std::to_string(i));
    for (int c = 0; c < d; ++c) v.push_back(normal(gen));
  }
  return FeatureMatrix(ids, static_cast<std::size_t>(d), v);
}

GbtParams exact_stump() {
  GbtParams p;
  p.n_rounds = 1;
  p.max_depth = 1;
  p.learning_rate = 1.0;
  p.lambda = 0.0;
  p.min_child_weight = 0.0;
  p.subsample = 1.0;
  p.colsample = 1.0;
  return p;
}

TEST(Train, ConstantLabels) {
  std::mt19937_64 gen(1);
  const auto x = random_x(gen, 30, 3);
  const std::vector<double> y(30, 0.37);
  GbtParams p;
  p.n_rounds = 20;
  p.base_score = 0.37;
  const auto m = train(x, y, p);
  for (double v : m.predict(x)) EXPECT_EQ(v, 0.37);
}

TEST(Train, StepFunctionFitsExactly) {
  const FeatureMatrix x({"a", "b", "c", "d", "e"}, 1, {0.1, 0.2, 0.3, 0.7, 0.9});
  const std::vector<double> y{0, 0, 0, 1, 1};
  GbtParams p = exact_stump();
  p.base_score = 0.4;
  TrainingTrace trace;
  const auto m = train(x, y, p, &trace);
  const auto pred = m.predict(x);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(pred[i], y[i], 1e-15);
  EXPECT_NEAR(trace.train_mse.back(), 0.0, 1e-30);
  EXPECT_DOUBLE_EQ(m.trees()[0].nodes[0].threshold, 0.5);
}

TEST(Train, MatchesBruteForceStump) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 5 + rep * 9;
    const auto x = random_x(gen, n, 1 + rep % 4);
    std::vector<double> y(n);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < n; ++i) {
      y[i] = u(gen) + (x.at(i, 0) > 0 ? 0.5 : 0.0);
      rows.emplace_back(x.row(i).begin(), x.row(i).end());
    }
    const auto m = train(x, y, exact_stump());
    const auto s = test_support::brute_stump(rows, y, m.base_score());
    ASSERT_TRUE(s);
    const auto& nodes = m.trees()[0].nodes;
    ASSERT_EQ(nodes.size(), 3u);
    EXPECT_EQ(nodes[0].feature, static_cast<int>(s->feature));
    EXPECT_EQ(nodes[0].threshold, s->threshold);
    EXPECT_EQ(nodes[nodes[0].left].weight, s->left_weight);
    EXPECT_EQ(nodes[nodes[0].right].weight, s->right_weight);
  }
}

TEST(Train, SigmoidTargetTrainRankCorrelation) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> noise(0.0, 0.05);
  const auto x = random_x(gen, 200, 4);
  const double w[] = {1.0, -0.5, 0.25, 0.0};
  std::vector<double> y(200);
  for (int i = 0; i < 200; ++i) {
    double z = 0.0;
    for (int c = 0; c < 4; ++c) z += w[c] * x.at(i, c);
    y[i] = 1.0 / (1.0 + std::exp(-z)) + noise(gen);
  }
  const auto m = train(x, y, GbtParams{});
  EXPECT_GE(stats::spearman(m.predict(x), y), 0.9);
}

TEST(Train, MseNonincreasingWithFullSampling) {
  std::mt19937_64 gen(4);
  for (int rep = 0; rep < 10; ++rep) {
    const auto x = random_x(gen, 60, 3);
    std::vector<double> y(60);
    for (int i = 0; i < 60; ++i) y[i] = std::cos(x.at(i, 1)) + 0.1 * x.at(i, 2);
    GbtParams p;
    p.n_rounds = 100;
    p.subsample = 1.0;
    p.colsample = 1.0;
    p.learning_rate = 0.5;
    TrainingTrace trace;
    train(x, y, p, &trace);
    ASSERT_EQ(trace.train_mse.size(), 100u);
    double prev = trace.initial_mse;
    for (double mse : trace.train_mse) {
      EXPECT_LE(mse, prev + 1e-12 * std::max(1.0, prev));
      prev = mse;
    }
  }
}

TEST(Train, DeterministicAndSeedSensitive) {
  std::mt19937_64 gen(5);
  const auto x = random_x(gen, 100, 5);
  std::vector<double> y(100);
  for (int i = 0; i < 100; ++i) y[i] = x.at(i, 0) - x.at(i, 3);
  GbtParams p;
  p.n_rounds = 40;
  p.seed = 17;
  EXPECT_EQ(train(x, y, p), train(x, y, p));
  GbtParams q = p;
  q.seed = 18;
  EXPECT_NE(train(x, y, p).trees(), train(x, y, q).trees());
}

TEST(Train, InvariantUnderRowPermutationAndConstantColumn) {
  std::mt19937_64 gen(6);
  const auto x = random_x(gen, 50, 2);
  std::vector<double> y(50);
  for (int i = 0; i < 50; ++i) y[i] = x.at(i, 0) * x.at(i, 1);
  GbtParams p;
  p.n_rounds = 25;
  p.subsample = 1.0;
  p.colsample = 1.0;
  const auto base = train(x, y, p).predict(x);

  std::vector<std::size_t> perm(50);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen);
  const auto px = x.select_rows(perm);
  std::vector<double> py(50);
  for (int i = 0; i < 50; ++i) py[i] = y[perm[i]];
  const auto permuted = train(px, py, p).predict(px);
  for (int i = 0; i < 50; ++i) EXPECT_NEAR(permuted[i], base[perm[i]], 1e-12);

  std::vector<double> widened;
  for (int i = 0; i < 50; ++i) {
    widened.push_back(x.at(i, 0));
    widened.push_back(x.at(i, 1));
    widened.push_back(3.0);
  }
  const FeatureMatrix wx(x.item_ids(), 3, widened);
  EXPECT_EQ(train(wx, y, p).predict(wx), base);
}

TEST(Train, MissingValuesLearnDirection) {
  // Rows with a missing value behave like large values.
  std::vector<std::string> ids;
  std::vector<double> v, y;
  for (int i = 0; i < 40; ++i) {
    ids.push_back("r" + std::to_string(i));
    const bool missing = i % 4 == 0;
    const double x = i / 40.0;
    v.push_back(missing ? kMissing : x);
    y.push_back(missing || x > 0.5 ? 1.0 : 0.0);
  }
  GbtParams p = exact_stump();
  const auto m = train(FeatureMatrix(ids, 1, v), y, p);
  EXPECT_FALSE(m.trees()[0].nodes[0].default_left);
  EXPECT_NEAR(m.predict_row(std::vector<double>{kMissing}), 1.0, 1e-12);
}

TEST(Train, EarlyStoppingKeepsBestPrefix) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto x = random_x(gen, 120, 3);
  std::vector<double> y(120);
  for (int i = 0; i < 120; ++i) y[i] = 0.3 * x.at(i, 0) + noise(gen);
  GbtParams p;
  p.n_rounds = 300;
  p.learning_rate = 0.3;
  p.early_stopping_rounds = 10;
  TrainingTrace trace;
  const auto m = train(x, y, p, &trace);
  EXPECT_LT(trace.validation_mse.size(), 300u);
  EXPECT_EQ(static_cast<int>(m.trees().size()), trace.best_round);
  const auto best = std::min_element(trace.validation_mse.begin(), trace.validation_mse.end());
  EXPECT_EQ(static_cast<int>(best - trace.validation_mse.begin()) + 1, trace.best_round);
}

TEST(Train, Errors) {
  const FeatureMatrix one({"a"}, 1, {1.0});
  EXPECT_THROW(train(one, std::vector<double>{1.0}, {}), Error);
  const FeatureMatrix two({"a", "b"}, 1, {1.0, 2.0});
  EXPECT_THROW(train(two, std::vector<double>{1.0}, {}), Error);
  EXPECT_THROW(train(two, std::vector<double>{1.0, std::nan("")}, {}), Error);
  GbtParams bad;
  bad.learning_rate = 0.0;
  EXPECT_THROW(train(two, std::vector<double>{1.0, 2.0}, bad), Error);
  bad = {};
  bad.subsample = 1.5;
  EXPECT_THROW(bad.validate(), Error);
}

}  // namespace
