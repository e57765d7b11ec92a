#include "memlab/protocol/types.hpp"

#include <algorithm>

#include "memlab/error.hpp"

namespace memlab::protocol {

std::string_view to_string(StimulusRole role) noexcept {
  switch (role) {
    case StimulusRole::kTarget: return "target";
    case StimulusRole::kFiller: return "filler";
    case StimulusRole::kVigilance: return "vigilance";
  }
  return "filler";
}

StimulusRole parse_role(std::string_view text) {
  if (text == "target") return StimulusRole::kTarget;
  if (text == "filler") return StimulusRole::kFiller;
  if (text == "vigilance") return StimulusRole::kVigilance;
  fail(ErrorCode::kInvalidInput, "unknown stimulus role '" + std::string(text) + "'");
}

void SequenceParams::validate() const {
  if (n_targets < 0 || n_fillers < 0 || n_vigilance < 0) fail(ErrorCode::kInvalidInput, "negative item count");
  if (target_spacing.min < 1 || target_spacing.min > target_spacing.max) {
    fail(ErrorCode::kInvalidInput, "target spacing must satisfy 1 <= min <= max");
  }
  if (vigilance_spacing.min < 1 || vigilance_spacing.min > vigilance_spacing.max) {
    fail(ErrorCode::kInvalidInput, "vigilance spacing must satisfy 1 <= min <= max");
  }
  if (display_ms <= 0 || gap_ms <= 0) fail(ErrorCode::kInvalidInput, "display and gap durations must be positive");
}

const StimulusItem* TrialSequence::find_item(std::string_view item_id) const {
  const auto it = std::find_if(items.begin(), items.end(), [&](const StimulusItem& s) { return s.item_id == item_id; });
  return it == items.end() ? nullptr : &*it;
}

const MemorabilityRow* MemorabilityTable::find(std::string_view item_id) const {
  const auto it = std::lower_bound(rows.begin(), rows.end(), item_id,
                                   [](const MemorabilityRow& r, std::string_view id) { return r.item_id < id; });
  return it != rows.end() && it->item_id == item_id ? &*it : nullptr;
}

}  // namespace memlab::protocol
