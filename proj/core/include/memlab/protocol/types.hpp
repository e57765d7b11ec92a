#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memlab::protocol {

enum class StimulusRole { kTarget, kFiller, kVigilance };

std::string_view to_string(StimulusRole role) noexcept;
/// Accepts "target", "filler", "vigilance". Throws InvalidInput otherwise.
StimulusRole parse_role(std::string_view text);

struct StimulusItem {
  std::string item_id;
  std::string image_uri;
  StimulusRole role = StimulusRole::kFiller;

  bool operator==(const StimulusItem&) const = default;
};

/// Inclusive bounds on the slot distance between an item's two presentations.
struct SpacingRange {
  int min = 1;
  int max = 1;

  bool contains(int distance) const noexcept { return distance >= min && distance <= max; }
  bool operator==(const SpacingRange&) const = default;
};

struct SequenceParams {
  int n_targets = 45;
  int n_fillers = 65;
  int n_vigilance = 0;
  SpacingRange target_spacing{36, 108};
  SpacingRange vigilance_spacing{1, 7};
  int display_ms = 1000;
  int gap_ms = 1400;
  /// Unset: every sequence is randomized from its seed. Set: the arrangement
  /// is a pure function of (pool, params, order id) and the seed is ignored.
  std::optional<std::int64_t> fixed_order;

  int slot_count() const noexcept { return 2 * n_targets + n_fillers + 2 * n_vigilance; }
  /// Throws InvalidInput on negative counts, empty spacing ranges or
  /// non-positive durations.
  void validate() const;

  bool operator==(const SequenceParams&) const = default;
};

struct Presentation {
  int slot = 0;
  std::string item_id;
  bool is_repeat = false;

  bool operator==(const Presentation&) const = default;
};

struct TrialSequence {
  std::string sequence_id;
  std::uint64_t seed = 0;
  SequenceParams params;
  std::vector<StimulusItem> items;  // the stimuli, in order of first presentation
  std::vector<Presentation> presentations;

  const StimulusItem* find_item(std::string_view item_id) const;
  bool operator==(const TrialSequence&) const = default;
};

using SequenceLibrary = std::map<std::string, TrialSequence, std::less<>>;

struct ResponseEvent {
  std::string session_id;
  int slot = 0;
  bool pressed = true;
  std::int64_t latency_ms = 0;

  bool operator==(const ResponseEvent&) const = default;
};

struct SessionRecord {
  std::string session_id;
  std::string participant_id;
  std::string sequence_id;
  std::vector<ResponseEvent> events;
  bool completed = false;

  bool operator==(const SessionRecord&) const = default;
};

/// A session counts only if vigilance_hit_rate >= min_vigilance_hit_rate and
/// false_alarm_rate <= max_false_alarm_rate.
struct Attentiveness {
  double min_vigilance_hit_rate = 0.5;
  double max_false_alarm_rate = 0.5;
};

struct SessionScore {
  std::string session_id;
  std::map<std::string, int> target_hits;  // target id -> 0/1
  double false_alarm_rate = 0.0;
  double vigilance_hit_rate = 0.0;
  bool attentive = false;

  bool operator==(const SessionScore&) const = default;
};

struct MemorabilityRow {
  std::string item_id;
  double score = 0.0;  // n_hits / n_observers
  int n_observers = 0;
  int n_hits = 0;
  double variance = 0.0;      // Bernoulli variance score * (1 - score) of individual hits
  double false_alarms = 0.0;  // share of observers who pressed on the first presentation

  bool operator==(const MemorabilityRow&) const = default;
};

struct MemorabilityTable {
  std::vector<MemorabilityRow> rows;  // sorted by item_id

  const MemorabilityRow* find(std::string_view item_id) const;
  bool operator==(const MemorabilityTable&) const = default;
};

}  // namespace memlab::protocol
