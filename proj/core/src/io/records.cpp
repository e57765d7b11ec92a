#include "memlab/io/records.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "memlab/error.hpp"
#include "memlab/io/csv.hpp"

namespace memlab::io {
namespace {

using json = nlohmann::ordered_json;
using protocol::MemorabilityRow;
using protocol::MemorabilityTable;
using protocol::Presentation;
using protocol::SessionRecord;
using protocol::StimulusItem;
using protocol::TrialSequence;

[[noreturn]] void bad_line(std::size_t line, const std::string& what) {
  fail(ErrorCode::kFormatError, "line " + std::to_string(line) + ": " + what);
}

template <typename T>
T field(const json& j, const char* key, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end()) bad_line(line, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    bad_line(line, std::string("field '") + key + "' has the wrong type");
  }
}

protocol::SpacingRange spacing_field(const json& j, const char* key, std::size_t line) {
  const auto v = field<std::vector<int>>(j, key, line);
  if (v.size() != 2) bad_line(line, std::string("field '") + key + "' must be [min, max]");
  return {v[0], v[1]};
}

struct PendingSequence {
  TrialSequence sequence;
  std::size_t first_line = 0;
};

}  // namespace

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kInvalidInput, "cannot open " + path.string());
  return in;
}

std::vector<StimulusItem> read_pool_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  const std::size_t id = t.require_column("item_id");
  const std::size_t uri = t.require_column("image_uri");
  const std::size_t role = t.require_column("role");
  std::vector<StimulusItem> pool;
  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    if (!seen.insert(row[id]).second) fail(ErrorCode::kFormatError, "duplicate item id '" + row[id] + "' in pool");
    if (row[id].empty()) fail(ErrorCode::kFormatError, "empty item id in pool");
    pool.push_back({row[id], row[uri], protocol::parse_role(row[role])});
  }
  return pool;
}

std::vector<StimulusItem> read_pool_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_pool_csv(in);
}

void write_pool_csv(std::ostream& out, const std::vector<StimulusItem>& pool) {
  write_csv_row(out, std::vector<std::string>{"item_id", "image_uri", "role"});
  for (const auto& item : pool) {
    write_csv_row(out, std::vector<std::string>{item.item_id, item.image_uri, std::string(to_string(item.role))});
  }
}

void write_sequence_jsonl(std::ostream& out, const TrialSequence& sequence) {
  const auto& p = sequence.params;
  for (const Presentation& pres : sequence.presentations) {
    const StimulusItem* item = sequence.find_item(pres.item_id);
    json j;
    j["type"] = "presentation";
    j["sequence_id"] = sequence.sequence_id;
    j["slot"] = pres.slot;
    j["item_id"] = pres.item_id;
    j["role"] = item ? to_string(item->role) : "filler";
    j["image_uri"] = item ? item->image_uri : "";
    j["repeat"] = pres.is_repeat;
    j["seed"] = sequence.seed;
    j["order_id"] = p.fixed_order ? json(*p.fixed_order) : json(nullptr);
    j["display_ms"] = p.display_ms;
    j["gap_ms"] = p.gap_ms;
    j["target_spacing"] = {p.target_spacing.min, p.target_spacing.max};
    j["vigilance_spacing"] = {p.vigilance_spacing.min, p.vigilance_spacing.max};
    out << j.dump() << '\n';
  }
}

void write_session_jsonl(std::ostream& out, const SessionRecord& session) {
  json head;
  head["type"] = "session";
  head["session_id"] = session.session_id;
  head["participant_id"] = session.participant_id;
  head["sequence_id"] = session.sequence_id;
  head["completed"] = session.completed;
  out << head.dump() << '\n';
  for (const auto& e : session.events) {
    json j;
    j["type"] = "event";
    j["session_id"] = session.session_id;
    j["slot"] = e.slot;
    j["pressed"] = e.pressed;
    j["latency_ms"] = e.latency_ms;
    out << j.dump() << '\n';
  }
}

void write_bundle_jsonl(std::ostream& out, const Bundle& bundle) {
  for (const auto& [id, seq] : bundle.sequences) write_sequence_jsonl(out, seq);
  for (const auto& s : bundle.sessions) write_session_jsonl(out, s);
}

Bundle read_bundle_jsonl(std::istream& in) {
  std::map<std::string, PendingSequence, std::less<>> pending;
  std::map<std::string, std::size_t, std::less<>> session_index;
  Bundle bundle;
  std::string text;
  std::size_t line = 0;
  struct LooseEvent {
    protocol::ResponseEvent event;
    std::size_t line;
  };
  std::vector<LooseEvent> events;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      bad_line(line, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) bad_line(line, "expected a JSON object");
    const std::string type = j.contains("type") ? field<std::string>(j, "type", line) : "presentation";
    if (type == "presentation") {
      const auto id = field<std::string>(j, "sequence_id", line);
      protocol::SequenceParams params;
      params.display_ms = field<int>(j, "display_ms", line);
      params.gap_ms = field<int>(j, "gap_ms", line);
      params.target_spacing = spacing_field(j, "target_spacing", line);
      params.vigilance_spacing = spacing_field(j, "vigilance_spacing", line);
      if (j.contains("order_id") && !j["order_id"].is_null()) params.fixed_order = field<std::int64_t>(j, "order_id", line);
      const auto seed = field<std::uint64_t>(j, "seed", line);
      auto [it, fresh] = pending.try_emplace(id);
      TrialSequence& seq = it->second.sequence;
      if (fresh) {
        seq.sequence_id = id;
        seq.seed = seed;
        seq.params = params;
        it->second.first_line = line;
      } else if (seq.seed != seed || seq.params.display_ms != params.display_ms ||
                 seq.params.gap_ms != params.gap_ms || seq.params.target_spacing != params.target_spacing ||
                 seq.params.vigilance_spacing != params.vigilance_spacing ||
                 seq.params.fixed_order != params.fixed_order) {
        bad_line(line, "presentation disagrees with earlier lines of sequence '" + id + "'");
      }
      StimulusItem item{field<std::string>(j, "item_id", line), field<std::string>(j, "image_uri", line),
                        protocol::parse_role(field<std::string>(j, "role", line))};
      if (const StimulusItem* known = seq.find_item(item.item_id)) {
        if (!(*known == item)) bad_line(line, "item '" + item.item_id + "' changes role or uri within a sequence");
      } else {
        seq.items.push_back(item);
      }
      seq.presentations.push_back({field<int>(j, "slot", line), item.item_id, field<bool>(j, "repeat", line)});
    } else if (type == "session") {
      SessionRecord rec;
      rec.session_id = field<std::string>(j, "session_id", line);
      rec.participant_id = field<std::string>(j, "participant_id", line);
      rec.sequence_id = field<std::string>(j, "sequence_id", line);
      rec.completed = field<bool>(j, "completed", line);
      if (!session_index.emplace(rec.session_id, bundle.sessions.size()).second) {
        bad_line(line, "duplicate session '" + rec.session_id + "'");
      }
      bundle.sessions.push_back(std::move(rec));
    } else if (type == "event") {
      protocol::ResponseEvent e;
      e.session_id = field<std::string>(j, "session_id", line);
      e.slot = field<int>(j, "slot", line);
      e.pressed = field<bool>(j, "pressed", line);
      e.latency_ms = field<std::int64_t>(j, "latency_ms", line);
      events.push_back({std::move(e), line});
    } else {
      bad_line(line, "unknown record type '" + type + "'");
    }
  }
  for (auto& ev : events) {
    const auto it = session_index.find(ev.event.session_id);
    if (it == session_index.end()) bad_line(ev.line, "event for undeclared session '" + ev.event.session_id + "'");
    bundle.sessions[it->second].events.push_back(std::move(ev.event));
  }
  for (auto& [id, p] : pending) {
    TrialSequence& seq = p.sequence;
    std::stable_sort(seq.presentations.begin(), seq.presentations.end(),
                     [](const Presentation& a, const Presentation& b) { return a.slot < b.slot; });
    // Items in order of first presentation, independent of line order.
    std::vector<StimulusItem> ordered;
    for (const auto& pres : seq.presentations) {
      if (std::none_of(ordered.begin(), ordered.end(),
                       [&](const StimulusItem& s) { return s.item_id == pres.item_id; })) {
        ordered.push_back(*seq.find_item(pres.item_id));
      }
    }
    seq.items = std::move(ordered);
    seq.params.n_targets = seq.params.n_fillers = seq.params.n_vigilance = 0;
    for (const auto& item : seq.items) {
      switch (item.role) {
        case protocol::StimulusRole::kTarget: ++seq.params.n_targets; break;
        case protocol::StimulusRole::kFiller: ++seq.params.n_fillers; break;
        case protocol::StimulusRole::kVigilance: ++seq.params.n_vigilance; break;
      }
    }
    bundle.sequences.emplace(id, std::move(seq));
  }
  return bundle;
}

Bundle read_bundle_files(const std::vector<std::filesystem::path>& paths) {
  Bundle merged;
  std::set<std::string> sessions;
  for (const auto& path : paths) {
    auto in = open_input(path);
    Bundle b;
    try {
      b = read_bundle_jsonl(in);
    } catch (const Error& e) {
      fail(e.code(), path.string() + ": " + e.what());
    }
    for (auto& [id, seq] : b.sequences) {
      const auto [it, fresh] = merged.sequences.emplace(id, seq);
      if (!fresh && !(it->second == seq)) {
        fail(ErrorCode::kFormatError, path.string() + ": sequence '" + id + "' differs from an earlier file");
      }
    }
    for (auto& s : b.sessions) {
      if (!sessions.insert(s.session_id).second) {
        fail(ErrorCode::kFormatError, path.string() + ": duplicate session '" + s.session_id + "'");
      }
      merged.sessions.push_back(std::move(s));
    }
  }
  return merged;
}

void write_table_csv(std::ostream& out, const MemorabilityTable& table) {
  write_csv_row(out, std::vector<std::string>{"item_id", "score", "n_observers", "variance", "false_alarms"});
  for (const auto& r : table.rows) {
    write_csv_row(out, std::vector<std::string>{r.item_id, format_number(r.score), std::to_string(r.n_observers),
                                                format_number(r.variance), format_number(r.false_alarms)});
  }
}

MemorabilityTable read_table_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  const std::size_t id = t.require_column("item_id");
  const std::size_t score = t.require_column("score");
  const std::size_t n = t.require_column("n_observers");
  const std::size_t var = t.require_column("variance");
  const std::size_t fa = t.require_column("false_alarms");
  MemorabilityTable table;
  for (const auto& row : t.rows) {
    MemorabilityRow r;
    r.item_id = row[id];
    r.score = parse_number(row[score], "score");
    r.n_observers = static_cast<int>(parse_integer(row[n], "n_observers"));
    r.n_hits = static_cast<int>(std::lround(r.score * r.n_observers));
    r.variance = parse_number(row[var], "variance");
    r.false_alarms = parse_number(row[fa], "false_alarms");
    table.rows.push_back(std::move(r));
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const MemorabilityRow& a, const MemorabilityRow& b) { return a.item_id < b.item_id; });
  return table;
}

void write_matrix_csv(std::ostream& out, const stats::ResponseMatrix& m) {
  std::vector<std::string> fields{"participant_id"};
  fields.insert(fields.end(), m.target_ids().begin(), m.target_ids().end());
  write_csv_row(out, fields);
  for (std::size_t p = 0; p < m.participant_count(); ++p) {
    fields.assign(1, m.participant_ids()[p]);
    for (auto cell : m.row(p)) {
      fields.emplace_back(cell == stats::Response::kHit ? "1" : cell == stats::Response::kMiss ? "0" : "");
    }
    write_csv_row(out, fields);
  }
}

stats::ResponseMatrix read_matrix_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  if (t.header.empty() || t.header[0] != "participant_id") {
    fail(ErrorCode::kFormatError, "response matrix CSV must start with a 'participant_id' column");
  }
  std::vector<std::string> targets(t.header.begin() + 1, t.header.end());
  std::vector<std::string> participants;
  std::vector<stats::Response> cells;
  for (const auto& row : t.rows) {
    participants.push_back(row[0]);
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] == "1") {
        cells.push_back(stats::Response::kHit);
      } else if (row[c] == "0") {
        cells.push_back(stats::Response::kMiss);
      } else if (row[c].empty()) {
        cells.push_back(stats::Response::kMissing);
      } else {
        fail(ErrorCode::kFormatError, "response matrix cell must be 1, 0 or empty, got '" + row[c] + "'");
      }
    }
  }
  return stats::ResponseMatrix(std::move(participants), std::move(targets), std::move(cells));
}

std::map<std::string, double, std::less<>> read_scores_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  const std::size_t id = t.require_column("item_id");
  std::size_t value = 0;
  if (auto c = t.column("score")) {
    value = *c;
  } else if (auto p = t.column("p")) {
    value = *p;
  } else if (auto pred = t.column("prediction")) {
    value = *pred;
  } else if (t.header.size() == 2) {
    value = id == 0 ? 1 : 0;
  } else {
    fail(ErrorCode::kFormatError, "score file needs a 'score', 'p' or 'prediction' column, or exactly two columns");
  }
  std::map<std::string, double, std::less<>> out;
  for (const auto& row : t.rows) {
    if (!out.emplace(row[id], parse_number(row[value], t.header[value])).second) {
      fail(ErrorCode::kFormatError, "duplicate item id '" + row[id] + "'");
    }
  }
  return out;
}

std::map<std::string, double, std::less<>> read_scores_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_scores_csv(in);
}

protocol::OrderEffect read_order_effect_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  const std::size_t order = t.require_column("order_id");
  const std::size_t item = t.require_column("item_id");
  const std::size_t delta = t.require_column("delta");
  protocol::OrderEffect out;
  for (const auto& row : t.rows) {
    out[{parse_integer(row[order], "order_id"), row[item]}] = parse_number(row[delta], "delta");
  }
  return out;
}

}  // namespace memlab::io
