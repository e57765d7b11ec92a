#pragma once

#include <span>

#include "memlab/protocol/types.hpp"
#include "memlab/stats/response_matrix.hpp"

namespace memlab::protocol {

/// Scores one playthrough. A target is hit iff the participant pressed on its
/// repeat slot. First showings of targets, first showings of vigilance items
/// and plain fillers are the non-repeat slots over which false alarms are
/// counted. Without vigilance items the vigilance check is vacuous and
/// vigilance_hit_rate is 1.
///
/// Throws InvalidInput if the record belongs to another sequence, an event
/// slot is out of range, or a slot has more than one event.
SessionScore score_session(const TrialSequence& sequence, const SessionRecord& record,
                           const Attentiveness& attentiveness = {});

struct AggregateResult {
  MemorabilityTable table;
  stats::ResponseMatrix matrix;  // one row per attentive session, sorted by session id
  int attentive_sessions = 0;
  int excluded_sessions = 0;  // completed but not attentive
};

/// Pools completed sessions into per-target memorability scores. Incomplete
/// sessions are skipped; non-attentive ones are excluded. The result does not
/// depend on the order of `sessions`.
///
/// Throws InvalidInput when a session references an unknown sequence and
/// EmptyAggregate when no attentive session remains.
AggregateResult aggregate_scores(const SequenceLibrary& sequences, std::span<const SessionRecord> sessions,
                                 const Attentiveness& attentiveness = {});

}  // namespace memlab::protocol
