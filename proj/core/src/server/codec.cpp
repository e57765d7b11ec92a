#include "codec.hpp"

#include "memlab/error.hpp"

namespace memlab::server::codec {
namespace {

template <typename T>
T required(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::kInvalidInput, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kInvalidInput, std::string("field '") + key + "' has the wrong type");
  }
}

protocol::SpacingRange spacing(const json& j, const char* key, protocol::SpacingRange fallback) {
  const auto v = value_or<std::vector<int>>(j, key, {fallback.min, fallback.max});
  if (v.size() != 2) fail(ErrorCode::kInvalidInput, std::string("field '") + key + "' must be [min, max]");
  return {v[0], v[1]};
}

}  // namespace

json to_json(const protocol::StimulusItem& item) {
  return json{{"item_id", item.item_id}, {"image_uri", item.image_uri}, {"role", to_string(item.role)}};
}

protocol::StimulusItem item_from_json(const json& j) {
  return {required<std::string>(j, "item_id"), value_or<std::string>(j, "image_uri", ""),
          protocol::parse_role(required<std::string>(j, "role"))};
}

json to_json(const protocol::SequenceParams& p) {
  json j;
  j["n_targets"] = p.n_targets;
  j["n_fillers"] = p.n_fillers;
  j["n_vigilance"] = p.n_vigilance;
  j["target_spacing"] = {p.target_spacing.min, p.target_spacing.max};
  j["vigilance_spacing"] = {p.vigilance_spacing.min, p.vigilance_spacing.max};
  j["display_ms"] = p.display_ms;
  j["gap_ms"] = p.gap_ms;
  j["order_id"] = p.fixed_order ? json(*p.fixed_order) : json(nullptr);
  return j;
}

protocol::SequenceParams params_from_json(const json& j) {
  protocol::SequenceParams p;
  p.n_targets = value_or(j, "n_targets", p.n_targets);
  p.n_fillers = value_or(j, "n_fillers", p.n_fillers);
  p.n_vigilance = value_or(j, "n_vigilance", p.n_vigilance);
  p.target_spacing = spacing(j, "target_spacing", p.target_spacing);
  p.vigilance_spacing = spacing(j, "vigilance_spacing", p.vigilance_spacing);
  p.display_ms = value_or(j, "display_ms", p.display_ms);
  p.gap_ms = value_or(j, "gap_ms", p.gap_ms);
  if (j.contains("order_id") && !j["order_id"].is_null()) p.fixed_order = required<std::int64_t>(j, "order_id");
  return p;
}

json to_json(const protocol::TrialSequence& s) {
  json items = json::array();
  for (const auto& item : s.items) items.push_back(to_json(item));
  json presentations = json::array();
  for (const auto& p : s.presentations) presentations.push_back(json{p.slot, p.item_id, p.is_repeat});
  return json{{"sequence_id", s.sequence_id},
              {"seed", s.seed},
              {"params", to_json(s.params)},
              {"items", std::move(items)},
              {"presentations", std::move(presentations)}};
}

protocol::TrialSequence sequence_from_json(const json& j) {
  protocol::TrialSequence s;
  s.sequence_id = required<std::string>(j, "sequence_id");
  s.seed = required<std::uint64_t>(j, "seed");
  s.params = params_from_json(required<json>(j, "params"));
  for (const auto& item : required<json>(j, "items")) s.items.push_back(item_from_json(item));
  for (const auto& p : required<json>(j, "presentations")) {
    if (!p.is_array() || p.size() != 3) fail(ErrorCode::kInvalidInput, "presentation must be [slot, item, repeat]");
    s.presentations.push_back({p[0].get<int>(), p[1].get<std::string>(), p[2].get<bool>()});
  }
  return s;
}

json to_json(const protocol::Attentiveness& a) {
  return json{{"min_vigilance_hit_rate", a.min_vigilance_hit_rate}, {"max_false_alarm_rate", a.max_false_alarm_rate}};
}

protocol::Attentiveness attentiveness_from_json(const json& j) {
  protocol::Attentiveness a;
  a.min_vigilance_hit_rate = value_or(j, "min_vigilance_hit_rate", a.min_vigilance_hit_rate);
  a.max_false_alarm_rate = value_or(j, "max_false_alarm_rate", a.max_false_alarm_rate);
  return a;
}

json to_json(const ExperimentConfig& c) {
  json pool = json::array();
  for (const auto& item : c.pool) pool.push_back(to_json(item));
  json j;
  j["experiment_id"] = c.experiment_id;
  j["pool"] = std::move(pool);
  j["params"] = to_json(c.params);
  j["fixed_sequence"] = c.fixed_sequence ? to_json(*c.fixed_sequence) : json(nullptr);
  j["attentiveness"] = to_json(c.attentiveness);
  j["max_sessions"] = c.max_sessions;
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.experiment_id = value_or<std::string>(j, "experiment_id", "");
  if (j.contains("pool") && !j["pool"].is_null()) {
    if (!j["pool"].is_array()) fail(ErrorCode::kInvalidInput, "field 'pool' must be an array");
    for (const auto& item : j["pool"]) c.pool.push_back(item_from_json(item));
  }
  if (j.contains("params") && !j["params"].is_null()) c.params = params_from_json(j["params"]);
  if (j.contains("fixed_sequence") && !j["fixed_sequence"].is_null()) {
    c.fixed_sequence = sequence_from_json(j["fixed_sequence"]);
  }
  if (j.contains("attentiveness") && !j["attentiveness"].is_null()) {
    c.attentiveness = attentiveness_from_json(j["attentiveness"]);
  }
  c.max_sessions = value_or(j, "max_sessions", c.max_sessions);
  if (j.contains("seed") && !j["seed"].is_null()) c.seed = required<std::uint64_t>(j, "seed");
  return c;
}

json to_json(const protocol::SessionScore& s) {
  json hits = json::object();
  for (const auto& [id, h] : s.target_hits) hits[id] = h;
  return json{{"session_id", s.session_id},
              {"target_hits", std::move(hits)},
              {"false_alarm_rate", s.false_alarm_rate},
              {"vigilance_hit_rate", s.vigilance_hit_rate},
              {"attentive", s.attentive}};
}

}  // namespace memlab::server::codec
