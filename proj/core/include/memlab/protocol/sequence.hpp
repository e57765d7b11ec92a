#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memlab/protocol/types.hpp"

namespace memlab::protocol {

/// Restarts allowed before generate_sequence reports InfeasibleSequence.
inline constexpr int kMaxPlacementAttempts = 10'000;

/// Builds a memory-game stream: every target and vigilance item shown twice
/// within its spacing window, every plain filler at most once.
///
/// Randomized mode samples the items from the pool and arranges them from
/// `seed`. Fixed-order mode takes the first n items of each role in pool
/// order and arranges them from the order id alone, so every order id over
/// the same pool shows the same item multiset.
///
/// Throws InvalidInput for a pool that is too small or has duplicate ids and
/// InfeasibleSequence when placement keeps failing.
TrialSequence generate_sequence(std::span<const StimulusItem> pool, const SequenceParams& params, std::uint64_t seed);

std::string sequence_id_for(const SequenceParams& params, std::uint64_t seed);

struct Violation {
  enum class Rule {
    kSlotIndex,         // slots not 0..len-1 in order
    kUnknownItem,       // presentation of an item not in the sequence's item list
    kMissingRepeat,     // target or vigilance item shown fewer than twice
    kExtraOccurrence,   // shown more often than its role allows
    kSpacingViolation,  // repeat distance outside the role's spacing window
    kRepeatFlag,        // is_repeat not set exactly on the second showing
  };
  Rule rule;
  std::string item_id;
  std::vector<int> slots;
  std::string detail;
};

std::string_view to_string(Violation::Rule rule) noexcept;

std::vector<Violation> validate_sequence(const TrialSequence& sequence);

}  // namespace memlab::protocol
