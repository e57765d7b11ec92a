#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "memlab/protocol/types.hpp"

namespace memlab::protocol {

/// Per-order shift of a target's detection probability, keyed by (order id, item id).
using OrderEffect = std::map<std::pair<std::int64_t, std::string>, double>;

struct ObserverModel {
  double false_alarm_prob = 0.02;  // press probability on any non-repeat slot
  double vigilance_prob = 0.9;     // press probability on a vigilance repeat
  int latency_mean_ms = 650;
  int latency_jitter_ms = 200;
};

/// Detection probabilities are clipped into this range before sampling.
inline constexpr double kMinDetectionProb = 0.01;
inline constexpr double kMaxDetectionProb = 0.99;

struct SimulatedSessions {
  SequenceLibrary sequences;
  std::vector<SessionRecord> sessions;  // completed, one per participant
};

/// Synthetic observers playing the memory game. `true_scores` defines the
/// targets (params.n_targets is replaced by its size); fillers and vigilance
/// items are generated as "filler-NNNN" / "vigilance-NNNN". Participant i
/// presses on a target repeat with probability clip(p + delta), where delta
/// comes from `order_effect` under params.fixed_order (randomized sequences
/// get no delta).
///
/// Throws InvalidInput for probabilities outside [0, 1], non-finite deltas or
/// n_participants < 1.
SimulatedSessions simulate_sessions(const std::map<std::string, double>& true_scores, int n_participants,
                                    const OrderEffect& order_effect, const SequenceParams& params,
                                    const ObserverModel& observers, std::uint64_t seed);

/// Item pool used by simulate_sessions for the given target ids.
std::vector<StimulusItem> synthetic_pool(const std::vector<std::string>& target_ids, int n_fillers, int n_vigilance);

}  // namespace memlab::protocol
