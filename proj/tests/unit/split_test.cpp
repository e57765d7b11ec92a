#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "memlab/error.hpp"
#include "memlab/gbt/split.hpp"

namespace {

using namespace memlab;
using namespace memlab::gbt;
using V = std::vector<double>;

TEST(LeafWeight, Examples) {
  EXPECT_DOUBLE_EQ(leaf_weight(-4, 4, 0), 1.0);
  EXPECT_EQ(leaf_weight(0, 3, 1), 0.0);
  EXPECT_DOUBLE_EQ(leaf_weight(-3, 2, 1), 1.0);
  EXPECT_THROW(leaf_weight(1, 0, 0), Error);
  EXPECT_THROW(leaf_weight(1, -2, 1), Error);
}

TEST(LeafWeight, MinimizesSecondOrderObjective) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> g(-10, 10), h(0.1, 10), l(0, 3);
  auto objective = [](double w, double G, double H, double lambda) { return G * w + 0.5 * (H + lambda) * w * w; };
  for (int rep = 0; rep < 500; ++rep) {
    const double G = g(gen), H = h(gen), lambda = l(gen);
    const double w = leaf_weight(G, H, lambda);
    for (double eps : {1e-3, -1e-3, 0.5, -0.5}) {
      EXPECT_LE(objective(w, G, H, lambda), objective(w + eps, G, H, lambda));
    }
  }
}

TEST(BestSplit, PerfectSeparation) {
  // Labels 0,0,1,1 around a prediction of 0.5: g = 0.5,0.5,-0.5,-0.5.
  // Each side has |G| = 1 and H = 2, so gain = 0.5 * (1/2 + 1/2 - 0) = 0.5.
  const V x{1, 2, 3, 4};
  const V g{0.5, 0.5, -0.5, -0.5};
  const V h{1, 1, 1, 1};
  const auto s = best_split(x, g, h, {0.0, 0.0, 0.0});
  ASSERT_TRUE(s);
  EXPECT_DOUBLE_EQ(s->threshold, 2.5);
  EXPECT_DOUBLE_EQ(s->gain, 0.5);
  EXPECT_DOUBLE_EQ(s->g_left, 1.0);
  EXPECT_DOUBLE_EQ(s->h_right, 2.0);

  // Exhaustive enumeration agrees: the other two thresholds score lower.
  EXPECT_LT(split_gain(0.5, 1, -0.5, 3, 0, 0), s->gain);
  EXPECT_LT(split_gain(0.5, 3, -0.5, 1, 0, 0), s->gain);
}

TEST(BestSplit, NoSplitCases) {
  const V x{1, 2, 3, 4};
  const V h{1, 1, 1, 1};
  EXPECT_FALSE(best_split(x, V{0, 0, 0, 0}, h, {0, 0, 0}));
  EXPECT_FALSE(best_split(x, V{0.5, 0.5, -0.5, -0.5}, h, {0.0, 0.6, 0.0}));
  EXPECT_TRUE(best_split(x, V{0.5, 0.5, -0.5, -0.5}, h, {0.0, 0.4, 0.0}));
  EXPECT_FALSE(best_split(V{2, 2, 2}, V{1, -1, 0}, V{1, 1, 1}, {0, 0, 0}));
  EXPECT_FALSE(best_split(x, V{0.5, 0.5, -0.5, -0.5}, h, {0.0, 0.0, 2.5}));
}

TEST(BestSplit, TiesGoToSmallerThreshold) {
  // Symmetric residuals: splitting after the first or before the last value scores the same.
  const auto s = best_split(V{0, 1, 2}, V{1, 0, 1}, V{1, 1, 1}, {0, 0, 0});
  ASSERT_TRUE(s);
  EXPECT_DOUBLE_EQ(s->threshold, 0.5);
}

TEST(BestSplit, ThresholdSeparatesAdjacentValues) {
  const double a = 1.0;
  const double b = std::nextafter(a, 2.0);
  const auto s = best_split(V{a, b}, V{1, -1}, V{1, 1}, {0, 0, 0});
  ASSERT_TRUE(s);
  EXPECT_LT(a, s->threshold);
  EXPECT_LE(s->threshold, b);
}

TEST(BestSplit, MissingRowsPickTheBetterSide) {
  // Present values pull apart; the missing rows look like the right side.
  const V x{1, 2, 3, 4};
  const V g{1, 1, -1, -1};
  const V h{1, 1, 1, 1};
  const auto right = best_split(x, g, h, {0, 0, 0}, -2.0, 2.0);
  ASSERT_TRUE(right);
  EXPECT_FALSE(right->default_left);
  EXPECT_DOUBLE_EQ(right->g_right, -4.0);
  const auto left = best_split(x, g, h, {0, 0, 0}, 2.0, 2.0);
  ASSERT_TRUE(left);
  EXPECT_TRUE(left->default_left);
  EXPECT_DOUBLE_EQ(left->g_left, 4.0);
}

TEST(BestSplit, LengthMismatch) { EXPECT_THROW(best_split(V{1, 2}, V{1}, V{1, 1}, {}), Error); }

}  // namespace
