#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "memlab/error.hpp"
#include "memlab/protocol/sequence.hpp"

namespace {

using namespace memlab;
using namespace memlab::protocol;

std::vector<StimulusItem> make_pool(int targets, int fillers, int vigilance) {
  std::vector<StimulusItem> pool;
  for (int i = 0; i < targets; ++i) pool.push_back({"t" + std::to_string(i), "t.jpg", StimulusRole::kTarget});
  for (int i = 0; i < fillers; ++i) pool.push_back({"f" + std::to_string(i), "f.jpg", StimulusRole::kFiller});
  for (int i = 0; i < vigilance; ++i) pool.push_back({"v" + std::to_string(i), "v.jpg", StimulusRole::kVigilance});
  return pool;
}

std::map<std::string, std::vector<int>> occurrences(const TrialSequence& seq) {
  std::map<std::string, std::vector<int>> out;
  for (const auto& p : seq.presentations) out[p.item_id].push_back(p.slot);
  return out;
}

TEST(GenerateSequence, FillersOnly) {
  SequenceParams params;
  params.n_targets = 0;
  params.n_fillers = 5;
  params.n_vigilance = 0;
  const auto seq = generate_sequence(make_pool(0, 5, 0), params, 1);
  ASSERT_EQ(seq.presentations.size(), 5u);
  for (const auto& p : seq.presentations) EXPECT_FALSE(p.is_repeat);
  EXPECT_TRUE(validate_sequence(seq).empty());
}

TEST(GenerateSequence, SmallSpacingWindowExhaustive) {
  SequenceParams params;
  params.n_targets = 2;
  params.n_fillers = 6;
  params.n_vigilance = 0;
  params.target_spacing = {3, 5};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto seq = generate_sequence(make_pool(4, 8, 0), params, seed);
    ASSERT_TRUE(validate_sequence(seq).empty());
    ASSERT_EQ(seq.presentations.size(), 10u);
    for (const auto& [id, slots] : occurrences(seq)) {
      if (id[0] != 't') {
        EXPECT_EQ(slots.size(), 1u);
        continue;
      }
      ASSERT_EQ(slots.size(), 2u);
      const int d = slots[1] - slots[0];
      EXPECT_TRUE(d == 3 || d == 4 || d == 5) << d;
      EXPECT_FALSE(seq.presentations[slots[0]].is_repeat);
      EXPECT_TRUE(seq.presentations[slots[1]].is_repeat);
    }
  }
}

TEST(GenerateSequence, DefaultsWithVigilance) {
  SequenceParams params;
  params.n_vigilance = 8;
  const auto seq = generate_sequence(make_pool(60, 80, 10), params, 42);
  EXPECT_EQ(static_cast<int>(seq.presentations.size()), params.slot_count());
  EXPECT_TRUE(validate_sequence(seq).empty());
  EXPECT_EQ(seq, generate_sequence(make_pool(60, 80, 10), params, 42));
  EXPECT_NE(seq.presentations, generate_sequence(make_pool(60, 80, 10), params, 43).presentations);
}

TEST(GenerateSequence, ItemsListedInFirstPresentationOrder) {
  SequenceParams params;
  params.n_targets = 5;
  params.n_fillers = 12;
  params.target_spacing = {2, 8};
  const auto seq = generate_sequence(make_pool(5, 12, 0), params, 3);
  std::vector<std::string> firsts;
  for (const auto& p : seq.presentations) {
    if (!p.is_repeat) firsts.push_back(p.item_id);
  }
  std::vector<std::string> listed;
  for (const auto& item : seq.items) listed.push_back(item.item_id);
  EXPECT_EQ(firsts, listed);
}

TEST(GenerateSequence, FiveFixedOrdersOver120Images) {
  // 45 targets and 75 fillers: 120 images, 165 slots.
  SequenceParams params;
  params.n_targets = 45;
  params.n_fillers = 75;
  params.target_spacing = {10, 60};
  const auto pool = make_pool(45, 75, 0);
  std::vector<TrialSequence> orders;
  for (std::int64_t order = 1; order <= 5; ++order) {
    params.fixed_order = order;
    orders.push_back(generate_sequence(pool, params, 1000 + order));
    EXPECT_EQ(orders.back(), generate_sequence(pool, params, 7)) << "order " << order;
    EXPECT_TRUE(validate_sequence(orders.back()).empty());
  }
  auto multiset = [](const TrialSequence& s) {
    std::multiset<std::string> m;
    for (const auto& p : s.presentations) m.insert(p.item_id);
    return m;
  };
  for (std::size_t a = 0; a < orders.size(); ++a) {
    EXPECT_EQ(multiset(orders[a]).size(), 165u);
    for (std::size_t b = a + 1; b < orders.size(); ++b) {
      EXPECT_EQ(multiset(orders[a]), multiset(orders[b]));
      EXPECT_NE(orders[a].presentations, orders[b].presentations);
    }
  }
}

TEST(GenerateSequence, Errors) {
  SequenceParams params;
  params.n_targets = 3;
  params.n_fillers = 2;
  try {
    generate_sequence(make_pool(2, 5, 0), params, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
  auto dup = make_pool(3, 2, 0);
  dup.push_back(dup[0]);
  EXPECT_THROW(generate_sequence(dup, params, 0), Error);

  params.target_spacing = {20, 30};  // 8 slots cannot hold a distance of 20
  try {
    generate_sequence(make_pool(3, 2, 0), params, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasibleSequence);
  }

  params.target_spacing = {5, 4};
  EXPECT_THROW(generate_sequence(make_pool(3, 2, 0), params, 0), Error);
  params.target_spacing = {1, 4};
  params.display_ms = 0;
  EXPECT_THROW(generate_sequence(make_pool(3, 2, 0), params, 0), Error);
}

TrialSequence hand_sequence(std::vector<std::pair<std::string, bool>> slots, SpacingRange spacing) {
  TrialSequence seq;
  seq.sequence_id = "hand";
  seq.params.n_targets = 1;
  seq.params.n_fillers = 2;
  seq.params.target_spacing = spacing;
  seq.items = {{"t", "", StimulusRole::kTarget}, {"f0", "", StimulusRole::kFiller}, {"f1", "", StimulusRole::kFiller}};
  for (std::size_t i = 0; i < slots.size(); ++i) {
    seq.presentations.push_back({static_cast<int>(i), slots[i].first, slots[i].second});
  }
  return seq;
}

std::set<Violation::Rule> rules(const std::vector<Violation>& v) {
  std::set<Violation::Rule> out;
  for (const auto& x : v) out.insert(x.rule);
  return out;
}

TEST(ValidateSequence, ValidHandSequence) {
  EXPECT_TRUE(validate_sequence(hand_sequence({{"t", false}, {"f0", false}, {"f1", false}, {"t", true}}, {3, 3})).empty());
}

TEST(ValidateSequence, SpacingBelowMinimum) {
  const auto v = validate_sequence(hand_sequence({{"t", false}, {"t", true}, {"f0", false}, {"f1", false}}, {2, 3}));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, Violation::Rule::kSpacingViolation);
  EXPECT_EQ(v[0].item_id, "t");
  EXPECT_EQ(v[0].slots, (std::vector<int>{0, 1}));
}

TEST(ValidateSequence, MissingRepeat) {
  const auto v = validate_sequence(hand_sequence({{"t", false}, {"f0", false}, {"f1", false}}, {1, 3}));
  EXPECT_EQ(rules(v), std::set<Violation::Rule>{Violation::Rule::kMissingRepeat});
}

TEST(ValidateSequence, OtherRules) {
  EXPECT_TRUE(rules(validate_sequence(hand_sequence({{"t", false}, {"f0", false}, {"f0", false}, {"t", true}}, {1, 3})))
                  .count(Violation::Rule::kExtraOccurrence));
  EXPECT_TRUE(rules(validate_sequence(hand_sequence({{"t", false}, {"f0", false}, {"x", false}, {"t", true}}, {1, 3})))
                  .count(Violation::Rule::kUnknownItem));
  EXPECT_TRUE(rules(validate_sequence(hand_sequence({{"t", true}, {"f0", false}, {"f1", false}, {"t", false}}, {1, 3})))
                  .count(Violation::Rule::kRepeatFlag));
  auto bad_slots = hand_sequence({{"t", false}, {"f0", false}, {"f1", false}, {"t", true}}, {1, 3});
  bad_slots.presentations[2].slot = 7;
  EXPECT_TRUE(rules(validate_sequence(bad_slots)).count(Violation::Rule::kSlotIndex));
  EXPECT_EQ(to_string(Violation::Rule::kSpacingViolation), "SpacingViolation");
}

}  // namespace
