#include "memlab/protocol/scoring.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "memlab/error.hpp"

namespace memlab::protocol {
namespace {

std::vector<bool> pressed_slots(const TrialSequence& sequence, const SessionRecord& record) {
  const std::size_t length = sequence.presentations.size();
  std::vector<bool> pressed(length, false);
  std::vector<bool> has_event(length, false);
  for (const ResponseEvent& e : record.events) {
    if (e.slot < 0 || static_cast<std::size_t>(e.slot) >= length) {
      fail(ErrorCode::kInvalidInput, "session " + record.session_id + ": event slot " + std::to_string(e.slot) +
                                         " outside sequence of length " + std::to_string(length));
    }
    if (has_event[e.slot]) {
      fail(ErrorCode::kInvalidInput,
           "session " + record.session_id + ": more than one event for slot " + std::to_string(e.slot));
    }
    has_event[e.slot] = true;
    pressed[e.slot] = e.pressed;
  }
  return pressed;
}

}  // namespace

SessionScore score_session(const TrialSequence& sequence, const SessionRecord& record,
                           const Attentiveness& attentiveness) {
  if (record.sequence_id != sequence.sequence_id) {
    fail(ErrorCode::kInvalidInput, "session " + record.session_id + " references sequence '" + record.sequence_id +
                                       "', got '" + sequence.sequence_id + "'");
  }
  const std::vector<bool> pressed = pressed_slots(sequence, record);

  SessionScore score;
  score.session_id = record.session_id;
  int non_repeat = 0;
  int false_alarms = 0;
  int vigilance_repeats = 0;
  int vigilance_hits = 0;
  for (const Presentation& p : sequence.presentations) {
    const StimulusItem* item = sequence.find_item(p.item_id);
    if (item == nullptr) fail(ErrorCode::kInvalidInput, "sequence presents unknown item '" + p.item_id + "'");
    const bool press = pressed[p.slot];
    if (!p.is_repeat) {
      ++non_repeat;
      if (press) ++false_alarms;
    } else if (item->role == StimulusRole::kTarget) {
      score.target_hits[p.item_id] = press ? 1 : 0;
    } else if (item->role == StimulusRole::kVigilance) {
      ++vigilance_repeats;
      if (press) ++vigilance_hits;
    }
  }
  score.false_alarm_rate = non_repeat > 0 ? static_cast<double>(false_alarms) / non_repeat : 0.0;
  score.vigilance_hit_rate = vigilance_repeats > 0 ? static_cast<double>(vigilance_hits) / vigilance_repeats : 1.0;
  score.attentive = score.vigilance_hit_rate >= attentiveness.min_vigilance_hit_rate &&
                    score.false_alarm_rate <= attentiveness.max_false_alarm_rate;
  return score;
}

AggregateResult aggregate_scores(const SequenceLibrary& sequences, std::span<const SessionRecord> sessions,
                                 const Attentiveness& attentiveness) {
  std::vector<const SessionRecord*> ordered;
  ordered.reserve(sessions.size());
  for (const SessionRecord& s : sessions) {
    if (s.completed) ordered.push_back(&s);
  }
  std::sort(ordered.begin(), ordered.end(), [](const SessionRecord* a, const SessionRecord* b) {
    return a->session_id < b->session_id;
  });

  struct Kept {
    const SessionRecord* record;
    const TrialSequence* sequence;
    SessionScore score;
    std::vector<bool> pressed;
  };
  std::vector<Kept> kept;
  AggregateResult result;
  std::set<std::string> targets;
  for (const SessionRecord* record : ordered) {
    const auto it = sequences.find(record->sequence_id);
    if (it == sequences.end()) {
      fail(ErrorCode::kInvalidInput,
           "session " + record->session_id + " references unknown sequence '" + record->sequence_id + "'");
    }
    SessionScore score = score_session(it->second, *record, attentiveness);
    if (!score.attentive) {
      ++result.excluded_sessions;
      continue;
    }
    for (const auto& [id, hit] : score.target_hits) targets.insert(id);
    kept.push_back({record, &it->second, std::move(score), pressed_slots(it->second, *record)});
  }
  if (kept.empty()) {
    fail(ErrorCode::kEmptyAggregate, std::to_string(ordered.size()) + " completed session(s), none attentive");
  }
  result.attentive_sessions = static_cast<int>(kept.size());

  const std::vector<std::string> target_ids(targets.begin(), targets.end());
  std::map<std::string, std::size_t, std::less<>> column;
  for (std::size_t j = 0; j < target_ids.size(); ++j) column[target_ids[j]] = j;

  std::vector<std::string> participants;
  participants.reserve(kept.size());
  for (const Kept& k : kept) participants.push_back(k.record->participant_id);
  result.matrix = stats::ResponseMatrix(std::move(participants), target_ids);

  std::vector<int> observers(target_ids.size(), 0);
  std::vector<int> hits(target_ids.size(), 0);
  std::vector<int> first_presses(target_ids.size(), 0);
  for (std::size_t row = 0; row < kept.size(); ++row) {
    const Kept& k = kept[row];
    for (const auto& [id, hit] : k.score.target_hits) {
      const std::size_t j = column.at(id);
      result.matrix.set(row, j, hit ? stats::Response::kHit : stats::Response::kMiss);
      ++observers[j];
      hits[j] += hit;
    }
    for (const Presentation& p : k.sequence->presentations) {
      if (p.is_repeat || !k.pressed[p.slot]) continue;
      const auto it = column.find(p.item_id);
      if (it != column.end() && k.score.target_hits.count(p.item_id) != 0) ++first_presses[it->second];
    }
  }

  result.table.rows.reserve(target_ids.size());
  for (std::size_t j = 0; j < target_ids.size(); ++j) {
    MemorabilityRow row;
    row.item_id = target_ids[j];
    row.n_observers = observers[j];
    row.n_hits = hits[j];
    row.score = static_cast<double>(hits[j]) / observers[j];
    row.variance = row.score * (1.0 - row.score);
    row.false_alarms = static_cast<double>(first_presses[j]) / observers[j];
    result.table.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace memlab::protocol
