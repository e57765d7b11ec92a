#include "memlab/protocol/sequence.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "memlab/error.hpp"
#include "memlab/random.hpp"

namespace memlab::protocol {
namespace {

constexpr std::uint64_t kFixedOrderSalt = 0x6669786564u;

struct PairToPlace {
  std::size_t item;  // index into the selected item list
  SpacingRange spacing;
};

std::vector<const StimulusItem*> take(std::vector<const StimulusItem*> candidates, int n, bool random, Engine& engine) {
  const auto k = static_cast<std::size_t>(n);
  if (random) {
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
      std::swap(candidates[i], candidates[pick(engine)]);
    }
  }
  candidates.resize(k);
  return candidates;
}

// Places one pair uniformly among all free (first, distance) combinations.
bool place_pair(std::vector<int>& owner, const PairToPlace& pair, Engine& engine) {
  const int length = static_cast<int>(owner.size());
  auto for_each_option = [&](auto&& visit) {
    for (int first = 0; first + pair.spacing.min < length; ++first) {
      if (owner[first] >= 0) continue;
      const int last = std::min(first + pair.spacing.max, length - 1);
      for (int second = first + pair.spacing.min; second <= last; ++second) {
        if (owner[second] < 0 && visit(first, second)) return;
      }
    }
  };
  std::uint64_t options = 0;
  for_each_option([&](int, int) { ++options; return false; });
  if (options == 0) return false;
  std::uniform_int_distribution<std::uint64_t> pick(0, options - 1);
  std::uint64_t target = pick(engine);
  for_each_option([&](int first, int second) {
    if (target-- != 0) return false;
    owner[first] = static_cast<int>(pair.item);
    owner[second] = static_cast<int>(pair.item);
    return true;
  });
  return true;
}

std::string describe(const SequenceParams& p) {
  std::ostringstream out;
  out << p.slot_count() << " slots, " << p.n_targets << " targets spaced [" << p.target_spacing.min << ","
      << p.target_spacing.max << "], " << p.n_vigilance << " vigilance spaced [" << p.vigilance_spacing.min << ","
      << p.vigilance_spacing.max << "], " << p.n_fillers << " fillers";
  return out.str();
}

}  // namespace

std::string sequence_id_for(const SequenceParams& params, std::uint64_t seed) {
  if (params.fixed_order) return "order-" + std::to_string(*params.fixed_order);
  std::ostringstream out;
  out << "seq-" << std::hex;
  out.width(16);
  out.fill('0');
  out << seed;
  return out.str();
}

TrialSequence generate_sequence(std::span<const StimulusItem> pool, const SequenceParams& params, std::uint64_t seed) {
  params.validate();

  std::set<std::string_view> seen;
  std::vector<const StimulusItem*> by_role[3];
  for (const StimulusItem& item : pool) {
    if (!seen.insert(item.item_id).second) fail(ErrorCode::kInvalidInput, "duplicate item id '" + item.item_id + "'");
    by_role[static_cast<int>(item.role)].push_back(&item);
  }
  const int need[3] = {params.n_targets, params.n_fillers, params.n_vigilance};
  for (int r = 0; r < 3; ++r) {
    if (static_cast<int>(by_role[r].size()) < need[r]) {
      fail(ErrorCode::kInvalidInput, "pool has " + std::to_string(by_role[r].size()) + " " +
                                         std::string(to_string(static_cast<StimulusRole>(r))) + " items, need " +
                                         std::to_string(need[r]));
    }
  }

  const bool fixed = params.fixed_order.has_value();
  const std::uint64_t arrangement_seed =
      fixed ? derive_seed(kFixedOrderSalt, static_cast<std::uint64_t>(*params.fixed_order)) : seed;
  Engine engine(arrangement_seed);

  TrialSequence sequence;
  sequence.sequence_id = sequence_id_for(params, seed);
  sequence.seed = fixed ? 0 : seed;
  sequence.params = params;

  std::vector<PairToPlace> target_pairs;
  std::vector<PairToPlace> vigilance_pairs;
  std::vector<std::size_t> fillers;
  for (const StimulusItem* item : take(by_role[0], params.n_targets, !fixed, engine)) {
    target_pairs.push_back({sequence.items.size(), params.target_spacing});
    sequence.items.push_back(*item);
  }
  for (const StimulusItem* item : take(by_role[2], params.n_vigilance, !fixed, engine)) {
    vigilance_pairs.push_back({sequence.items.size(), params.vigilance_spacing});
    sequence.items.push_back(*item);
  }
  for (const StimulusItem* item : take(by_role[1], params.n_fillers, !fixed, engine)) {
    fillers.push_back(sequence.items.size());
    sequence.items.push_back(*item);
  }

  const int length = params.slot_count();
  const int n_pairs = params.n_targets + params.n_vigilance;
  // Cheap necessary conditions: every first showing needs a partner slot at
  // least `min` positions later.
  const bool obviously_infeasible =
      (params.n_targets > 0 && params.n_targets > length - params.target_spacing.min) ||
      (params.n_vigilance > 0 && params.n_vigilance > length - params.vigilance_spacing.min) ||
      (n_pairs > 0 &&
       n_pairs > length - std::min(params.n_targets > 0 ? params.target_spacing.min : length,
                                   params.n_vigilance > 0 ? params.vigilance_spacing.min : length));
  if (obviously_infeasible) fail(ErrorCode::kInfeasibleSequence, "no placement exists: " + describe(params));

  // Wider minimum spacing is harder to place, so that class goes first.
  const bool targets_first = params.target_spacing.min >= params.vigilance_spacing.min;
  std::vector<int> owner;
  for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
    owner.assign(static_cast<std::size_t>(length), -1);
    std::shuffle(target_pairs.begin(), target_pairs.end(), engine);
    std::shuffle(vigilance_pairs.begin(), vigilance_pairs.end(), engine);
    const auto& first_class = targets_first ? target_pairs : vigilance_pairs;
    const auto& second_class = targets_first ? vigilance_pairs : target_pairs;
    bool placed = true;
    for (const auto* group : {&first_class, &second_class}) {
      for (const PairToPlace& pair : *group) {
        if (!place_pair(owner, pair, engine)) {
          placed = false;
          break;
        }
      }
      if (!placed) break;
    }
    if (!placed) continue;

    std::shuffle(fillers.begin(), fillers.end(), engine);
    auto next_filler = fillers.begin();
    std::vector<bool> shown(sequence.items.size(), false);
    std::vector<StimulusItem> first_seen;
    sequence.presentations.reserve(static_cast<std::size_t>(length));
    for (int slot = 0; slot < length; ++slot) {
      int item = owner[slot];
      if (item < 0) item = static_cast<int>(*next_filler++);
      sequence.presentations.push_back({slot, sequence.items[item].item_id, shown[item]});
      if (!shown[item]) first_seen.push_back(sequence.items[item]);
      shown[item] = true;
    }
    sequence.items = std::move(first_seen);
    return sequence;
  }
  fail(ErrorCode::kInfeasibleSequence,
       "no placement found after " + std::to_string(kMaxPlacementAttempts) + " attempts: " + describe(params));
}

std::string_view to_string(Violation::Rule rule) noexcept {
  switch (rule) {
    case Violation::Rule::kSlotIndex: return "SlotIndex";
    case Violation::Rule::kUnknownItem: return "UnknownItem";
    case Violation::Rule::kMissingRepeat: return "MissingRepeat";
    case Violation::Rule::kExtraOccurrence: return "ExtraOccurrence";
    case Violation::Rule::kSpacingViolation: return "SpacingViolation";
    case Violation::Rule::kRepeatFlag: return "RepeatFlag";
  }
  return "Unknown";
}

std::vector<Violation> validate_sequence(const TrialSequence& sequence) {
  std::vector<Violation> violations;
  std::map<std::string, std::vector<int>, std::less<>> occurrences;

  for (std::size_t i = 0; i < sequence.presentations.size(); ++i) {
    const Presentation& p = sequence.presentations[i];
    if (p.slot != static_cast<int>(i)) {
      violations.push_back({Violation::Rule::kSlotIndex, p.item_id, {p.slot},
                            "position " + std::to_string(i) + " carries slot " + std::to_string(p.slot)});
    }
    if (sequence.find_item(p.item_id) == nullptr) {
      violations.push_back({Violation::Rule::kUnknownItem, p.item_id, {p.slot}, "item not in the sequence item list"});
      continue;
    }
    occurrences[p.item_id].push_back(static_cast<int>(i));
  }

  for (const StimulusItem& item : sequence.items) {
    const auto it = occurrences.find(item.item_id);
    const std::vector<int> positions = it == occurrences.end() ? std::vector<int>{} : it->second;
    const bool paired = item.role != StimulusRole::kFiller;
    const std::size_t allowed = paired ? 2 : 1;

    if (paired && positions.size() < 2) {
      violations.push_back({Violation::Rule::kMissingRepeat, item.item_id, positions,
                            "shown " + std::to_string(positions.size()) + " time(s), expected 2"});
    }
    if (positions.size() > allowed) {
      violations.push_back({Violation::Rule::kExtraOccurrence, item.item_id, positions,
                            "shown " + std::to_string(positions.size()) + " times, at most " +
                                std::to_string(allowed) + " allowed"});
    }
    for (std::size_t k = 0; k < positions.size(); ++k) {
      const bool expect_repeat = k > 0;
      if (sequence.presentations[positions[k]].is_repeat != expect_repeat) {
        violations.push_back({Violation::Rule::kRepeatFlag, item.item_id, {positions[k]},
                              expect_repeat ? "second showing not flagged as repeat" : "first showing flagged as repeat"});
      }
    }
    if (paired && positions.size() == 2) {
      const SpacingRange& window =
          item.role == StimulusRole::kTarget ? sequence.params.target_spacing : sequence.params.vigilance_spacing;
      const int distance = positions[1] - positions[0];
      if (!window.contains(distance)) {
        violations.push_back({Violation::Rule::kSpacingViolation, item.item_id, positions,
                              "distance " + std::to_string(distance) + " outside [" + std::to_string(window.min) +
                                  "," + std::to_string(window.max) + "]"});
      }
    }
  }
  return violations;
}

}  // namespace memlab::protocol
