#include <gtest/gtest.h>

#include <cmath>

#include "memlab/error.hpp"
#include "memlab/protocol/order_study.hpp"
#include "scenarios.hpp"

namespace {

using namespace memlab;
using namespace memlab::protocol;

TEST(OrderStudy, DeltasSeparateOrders) {
  const auto truth = test_support::clipped_normal_truth(45, test_support::kTargetScoreMean, test_support::kTargetScoreSd, 31);
  const auto shifted = test_support::two_order_scenario(truth, 0.3, 500, 31);
  const auto r = order_study_report(shifted.sequences, shifted.grouped, 25, 60, 4);
  EXPECT_EQ(r.order_ids.size(), 2u);
  EXPECT_EQ(r.per_order_tables.size(), 2u);
  EXPECT_EQ(r.within_order.per_split_rhos.size(), 120u);  // pooled over both orders
  EXPECT_EQ(r.cross_order.per_split_rhos.size(), 60u);
  EXPECT_GE(r.within_order.mean_rho - r.cross_order.mean_rho, 0.15);

  const auto plain = test_support::two_order_scenario(truth, 0.0, 500, 31);
  const auto n = order_study_report(plain.sequences, plain.grouped, 25, 60, 4);
  EXPECT_LE(std::abs(n.within_order.mean_rho - n.cross_order.mean_rho), 0.05);
}

TEST(OrderStudy, DuplicatedSessionsAcrossOrders) {
  // Every session in both orders presses on the repeats of x and y, so any
  // group from either order has means x=1, y=1, z=0.
  TrialSequence seq;
  seq.sequence_id = "a";
  seq.params.n_targets = 3;
  seq.params.n_fillers = 0;
  seq.params.target_spacing = {3, 3};
  seq.items = {{"x", "", StimulusRole::kTarget}, {"y", "", StimulusRole::kTarget}, {"z", "", StimulusRole::kTarget}};
  const char* order[] = {"x", "y", "z", "x", "y", "z"};
  for (int i = 0; i < 6; ++i) seq.presentations.push_back({i, order[i], i >= 3});
  auto other = seq;
  other.sequence_id = "b";
  SequenceLibrary lib{{"a", seq}, {"b", other}};

  std::map<std::string, std::vector<SessionRecord>> grouped;
  for (const char* label : {"a", "b"}) {
    for (int i = 0; i < 4; ++i) {
      SessionRecord r{std::string(label) + std::to_string(i), "p", label, {}, true};
      r.events.push_back({r.session_id, 3, true, 100});
      r.events.push_back({r.session_id, 4, true, 100});
      grouped[label].push_back(r);
    }
  }
  const auto r = order_study_report(lib, grouped, 2, 1, 0);
  ASSERT_EQ(r.cross_order.per_split_rhos.size(), 1u);
  EXPECT_DOUBLE_EQ(r.cross_order.per_split_rhos[0], 1.0);
  EXPECT_DOUBLE_EQ(r.within_order.mean_rho, 1.0);
}

TEST(OrderStudy, Errors) {
  const auto truth = test_support::clipped_normal_truth(10, 0.6, 0.1, 1);
  auto scenario = test_support::two_order_scenario(truth, 0.0, 20, 1);
  EXPECT_THROW(order_study_report(scenario.sequences, scenario.grouped, 25, 5, 0), Error);
  scenario.grouped.erase(scenario.grouped.begin());
  EXPECT_THROW(order_study_report(scenario.sequences, scenario.grouped, 5, 5, 0), Error);
}

}  // namespace
