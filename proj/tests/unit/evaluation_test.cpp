#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "memlab/error.hpp"
#include "memlab/eval/evaluation.hpp"
#include "memlab/stats/rank.hpp"

namespace {

using namespace memlab;
using namespace memlab::eval;

struct Task {
  gbt::FeatureMatrix x;
  ItemScores truth;
};

// Truth is a noiseless monotone function of feature 0; feature 1 is noise.
Task one_feature_task(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u;
  std::vector<std::string> ids;
  std::vector<double> v;
  Task t;
  for (int i = 0; i < n; ++i) {
    ids.push_back("i" + std::to_string(i));
    const double a = u(gen);
    v.push_back(a);
    v.push_back(u(gen));
    t.truth[ids.back()] = a * a;
  }
  t.x = gbt::FeatureMatrix(ids, 2, v);
  return t;
}

gbt::GbtParams small_params() {
  gbt::GbtParams p;
  p.n_rounds = 100;
  p.max_depth = 2;
  p.learning_rate = 0.1;
  return p;
}

TEST(MakeSplit, SizesAndDisjointness) {
  const auto s = make_split(50, 0.2, 3);
  EXPECT_EQ(s.test.size(), 10u);
  EXPECT_EQ(s.train.size(), 40u);
  std::set<std::size_t> all(s.test.begin(), s.test.end());
  all.insert(s.train.begin(), s.train.end());
  EXPECT_EQ(all.size(), 50u);
  EXPECT_TRUE(std::is_sorted(s.test.begin(), s.test.end()));
  EXPECT_EQ(make_split(50, 0.2, 3), s);
  EXPECT_EQ(make_split(5, 0.01, 1).test.size(), 2u);
  EXPECT_EQ(make_split(5, 0.99, 1).test.size(), 3u);
  EXPECT_THROW(make_split(3, 0.5, 1), Error);
}

TEST(EvalProtocol, ConstructiveTask) {
  const auto t = one_feature_task(150, 1);
  const auto r = eval_protocol(t.x, t.truth, small_params(), {25, 0.2, 2}, "one");
  EXPECT_GE(r.mean_rho, 0.95);
  ASSERT_EQ(r.per_split_rho.size(), 25u);
  EXPECT_EQ(r.splits.size(), 25u);
  const auto ms = stats::mean_population_std(r.per_split_rho);
  EXPECT_NEAR(r.mean_rho, ms.mean, 1e-12);
  EXPECT_NEAR(r.sigma_rho, ms.std, 1e-12);
  EXPECT_EQ(r.name, "one");
}

TEST(EvalProtocol, PermutedLabelsNull) {
  auto t = one_feature_task(150, 2);
  std::vector<double> values;
  for (const auto& [id, v] : t.truth) values.push_back(v);
  std::shuffle(values.begin(), values.end(), std::mt19937_64(9));
  std::size_t i = 0;
  for (auto& [id, v] : t.truth) v = values[i++];
  const auto r = eval_protocol(t.x, t.truth, small_params(), {25, 0.2, 3});
  EXPECT_LE(std::abs(r.mean_rho), 3.0 * r.sigma_rho);
}

TEST(EvalProtocol, Deterministic) {
  const auto t = one_feature_task(40, 3);
  const auto a = eval_protocol(t.x, t.truth, small_params(), {1, 0.25, 8});
  const auto b = eval_protocol(t.x, t.truth, small_params(), {1, 0.25, 8});
  EXPECT_EQ(a.per_split_rho, b.per_split_rho);
  EXPECT_EQ(a.splits, b.splits);
}

TEST(EvalProtocol, ResamplesConstantTestRankings) {
  // Only two items differ from the rest, so most test sets see a constant truth.
  std::vector<std::string> ids;
  std::vector<double> v;
  ItemScores truth;
  for (int i = 0; i < 12; ++i) {
    ids.push_back("i" + std::to_string(i));
    v.push_back(i);
    truth[ids.back()] = i < 2 ? 1.0 : 0.0;
  }
  const gbt::FeatureMatrix x(ids, 1, v);
  gbt::GbtParams p = small_params();
  p.subsample = 1.0;
  const auto r = eval_protocol(x, truth, p, {3, 0.2, 5});
  EXPECT_EQ(r.per_split_rho.size(), 3u);
  EXPECT_GT(r.resampled_splits, 0);

  ItemScores flat;
  for (const auto& id : ids) flat[id] = 0.5;
  try {
    eval_protocol(x, flat, p, {3, 0.2, 5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateInput);
  }
}

TEST(EvalProtocol, Errors) {
  const auto t = one_feature_task(20, 4);
  auto partial = t.truth;
  partial.erase(partial.begin());
  EXPECT_THROW(eval_protocol(t.x, partial, small_params(), {}), Error);
  auto renamed = partial;
  renamed["other"] = 0.5;
  EXPECT_THROW(eval_protocol(t.x, renamed, small_params(), {}), Error);
  const auto tiny = one_feature_task(9, 4);
  EXPECT_THROW(eval_protocol(tiny.x, tiny.truth, small_params(), {}), Error);
  EXPECT_THROW(eval_protocol(t.x, t.truth, small_params(), {0, 0.2, 0}), Error);
  EXPECT_THROW(eval_protocol(t.x, t.truth, small_params(), {5, 1.0, 0}), Error);
}

TEST(CompareFeatureSets, InformativeFirstAndDuplicatesTie) {
  const auto t = one_feature_task(120, 5);
  std::mt19937_64 gen(6);
  std::normal_distribution<double> normal;
  std::vector<double> noise;
  for (std::size_t i = 0; i < 3 * t.x.rows(); ++i) noise.push_back(normal(gen));
  const gbt::FeatureMatrix noise_x(t.x.item_ids(), 3, noise);
  std::vector<NamedFeatures> sets{{"noise", noise_x}, {"good", t.x}, {"good-copy", t.x}};
  const auto r = compare_feature_sets(sets, t.truth, small_params(), {10, 0.2, 7});
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].name, "good");
  EXPECT_EQ(r[1].name, "good-copy");
  EXPECT_EQ(r[0].mean_rho, r[1].mean_rho);
  EXPECT_GE(r[0].mean_rho - r[2].mean_rho, 0.3);
  EXPECT_THROW(compare_feature_sets(std::span(sets).first(1), t.truth, small_params(), {}), Error);
}

TEST(ErrorDifference, IdenticalPredictorsTie) {
  const ItemScores truth{{"a", 0.1}, {"b", 0.5}, {"c", 0.9}};
  const ItemScores p{{"a", 0.3}, {"b", 0.3}, {"c", 0.3}};
  const auto r = error_difference(p, p, truth, default_bin_edges());
  for (const auto& item : r.items) EXPECT_EQ(item.difference, 0.0);
  int ties = 0;
  for (const auto& bin : r.bins) ties += bin.ties;
  EXPECT_EQ(ties, 3);
  EXPECT_EQ(r.bins.size(), 20u);
}

TEST(ErrorDifference, PerfectPredictorWins) {
  const ItemScores truth{{"a", 0.1}, {"b", 0.5}, {"c", 0.9}};
  const ItemScores b{{"a", 0.2}, {"b", 0.4}, {"c", 0.7}};
  const auto r = error_difference(truth, b, truth, default_bin_edges());
  for (const auto& item : r.items) EXPECT_LE(item.difference, 0.0);
  for (const auto& bin : r.bins) EXPECT_EQ(bin.b_better, 0);
}

TEST(ErrorDifference, HandBuiltHistogram) {
  // Edges 0, 0.5, 1.
  //  w: truth 0.2, |0.3-0.2| - |0.2-0.2| = +0.1  -> B better, bin 0
  //  x: truth 0.4, |0.4-0.4| - |0.1-0.4| = -0.3  -> A better, bin 0
  //  y: truth 0.5, |0.75-0.5| - |0.25-0.5| = 0 -> tie, bin 1
  //  z: truth 1.0, |0.9-1.0| - |0.5-1.0| = -0.4  -> A better, last bin is closed
  const ItemScores truth{{"w", 0.2}, {"x", 0.4}, {"y", 0.5}, {"z", 1.0}};
  const ItemScores a{{"w", 0.3}, {"x", 0.4}, {"y", 0.75}, {"z", 0.9}};
  const ItemScores b{{"w", 0.2}, {"x", 0.1}, {"y", 0.25}, {"z", 0.5}};
  const std::vector<double> edges{0.0, 0.5, 1.0};
  const auto r = error_difference(a, b, truth, edges);
  ASSERT_EQ(r.items.size(), 4u);
  EXPECT_NEAR(r.items[0].difference, 0.1, 1e-12);
  EXPECT_NEAR(r.items[1].difference, -0.3, 1e-12);
  EXPECT_NEAR(r.items[3].difference, -0.4, 1e-12);
  EXPECT_EQ(r.bins[0].a_better, 1);
  EXPECT_EQ(r.bins[0].b_better, 1);
  EXPECT_EQ(r.bins[1].a_better, 1);
  EXPECT_EQ(r.bins[1].ties, 1);
  EXPECT_EQ(r.bins[1].b_better, 0);
  EXPECT_EQ(r.unbinned, 0);

  const std::vector<double> narrow{0.3, 0.6};
  EXPECT_EQ(error_difference(a, b, truth, narrow).unbinned, 2);
}

TEST(ErrorDifference, Errors) {
  const ItemScores truth{{"a", 0.1}};
  const ItemScores other{{"b", 0.1}};
  const std::vector<double> edges{0.0, 1.0};
  EXPECT_THROW(error_difference(other, truth, truth, edges), Error);
  EXPECT_THROW(error_difference(truth, truth, truth, std::vector<double>{0.0}), Error);
  EXPECT_THROW(error_difference(truth, truth, truth, std::vector<double>{0.5, 0.5}), Error);
}

}  // namespace
