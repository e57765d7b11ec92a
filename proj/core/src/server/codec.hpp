#pragma once

// JSON forms of protocol types used in the experiment log and snapshots.

#include <nlohmann/json.hpp>

#include "memlab/error.hpp"
#include "memlab/protocol/types.hpp"
#include "memlab/server/experiment_service.hpp"

namespace memlab::server::codec {

using json = nlohmann::ordered_json;

json to_json(const protocol::StimulusItem& item);
protocol::StimulusItem item_from_json(const json& j);

json to_json(const protocol::SequenceParams& params);
protocol::SequenceParams params_from_json(const json& j);

json to_json(const protocol::TrialSequence& sequence);
protocol::TrialSequence sequence_from_json(const json& j);

json to_json(const protocol::Attentiveness& a);
protocol::Attentiveness attentiveness_from_json(const json& j);

json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const json& j);

json to_json(const protocol::SessionScore& score);

/// Reads `key` from `j` or returns `fallback` when absent; throws InvalidInput
/// when present with the wrong type.
template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kInvalidInput, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace memlab::server::codec
