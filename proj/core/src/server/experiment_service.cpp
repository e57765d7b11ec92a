#include "memlab/server/experiment_service.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "codec.hpp"
#include "memlab/error.hpp"
#include "memlab/io/records.hpp"
#include "memlab/protocol/scoring.hpp"
#include "memlab/protocol/sequence.hpp"
#include "memlab/random.hpp"
#include "memlab/server/event_log.hpp"

namespace memlab::server {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kLogFile = "events.jsonl";
constexpr const char* kSnapshotFile = "snapshot.json";

struct Session {
  protocol::SessionRecord record;
  std::uint64_t seed = 0;
  std::map<int, ResponseAck> acks;
};

bool valid_id(const std::string& id) {
  return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_';
  });
}

std::string session_id_for(const std::string& experiment_id, std::size_t index) {
  std::string n = std::to_string(index + 1);
  if (n.size() < 6) n.insert(0, 6 - n.size(), '0');
  return experiment_id + "." + n;
}

}  // namespace

struct ExperimentService::Experiment {
  std::mutex mutex;
  ExperimentConfig config;
  protocol::SequenceLibrary sequences;
  std::map<std::string, Session, std::less<>> sessions;
  std::unique_ptr<EventLog> log;
  fs::path dir;
  std::uint64_t snapshot_offset = 0;

  const protocol::TrialSequence& sequence_of(const Session& s) const { return sequences.at(s.record.sequence_id); }

  Session& session(const std::string& id) {
    const auto it = sessions.find(id);
    if (it == sessions.end()) fail(ErrorCode::kNotFound, "unknown session '" + id + "'");
    return it->second;
  }

  void add_sequence(protocol::TrialSequence seq) {
    const auto [it, fresh] = sequences.emplace(seq.sequence_id, seq);
    if (!fresh && !(it->second == seq)) {
      fail(ErrorCode::kFormatError, "sequence '" + seq.sequence_id + "' recorded twice with different content");
    }
  }

  void apply(const LogEntry& e) {
    const json& p = e.payload;
    if (e.type == "experiment_created") {
      config = codec::config_from_json(p.at("config"));
    } else if (e.type == "session_created") {
      Session s;
      s.record.session_id = p.at("session_id").get<std::string>();
      s.record.participant_id = p.at("participant_id").get<std::string>();
      s.seed = p.at("seed").get<std::uint64_t>();
      auto seq = codec::sequence_from_json(p.at("sequence"));
      s.record.sequence_id = seq.sequence_id;
      add_sequence(std::move(seq));
      sessions.emplace(s.record.session_id, std::move(s));
    } else if (e.type == "response") {
      Session& s = session(p.at("session_id").get<std::string>());
      protocol::ResponseEvent ev{s.record.session_id, p.at("slot").get<int>(), p.at("pressed").get<bool>(),
                                 p.at("latency_ms").get<std::int64_t>()};
      s.acks[ev.slot] = ResponseAck{s.record.session_id, ev.slot, p.at("correct").get<bool>(), e.offset, e.ts_ms};
      s.record.events.push_back(std::move(ev));
    } else if (e.type == "session_completed") {
      session(p.at("session_id").get<std::string>()).record.completed = true;
    } else {
      fail(ErrorCode::kFormatError, "unknown log entry type '" + e.type + "'");
    }
  }

  json state() const {
    json seqs = json::array();
    for (const auto& [id, s] : sequences) seqs.push_back(codec::to_json(s));
    json sess = json::array();
    for (const auto& [id, s] : sessions) {
      json events = json::array();
      for (const auto& ev : s.record.events) {
        const ResponseAck& ack = s.acks.at(ev.slot);
        events.push_back(json{{"slot", ev.slot},
                              {"pressed", ev.pressed},
                              {"latency_ms", ev.latency_ms},
                              {"correct", ack.correct},
                              {"offset", ack.offset},
                              {"ts", ack.received_ms}});
      }
      sess.push_back(json{{"session_id", id},
                          {"participant_id", s.record.participant_id},
                          {"sequence_id", s.record.sequence_id},
                          {"seed", s.seed},
                          {"completed", s.record.completed},
                          {"events", std::move(events)}});
    }
    return json{{"config", codec::to_json(config)}, {"sequences", std::move(seqs)}, {"sessions", std::move(sess)}};
  }

  void restore(const json& st) {
    config = codec::config_from_json(st.at("config"));
    for (const auto& s : st.at("sequences")) add_sequence(codec::sequence_from_json(s));
    for (const auto& js : st.at("sessions")) {
      Session s;
      s.record.session_id = js.at("session_id").get<std::string>();
      s.record.participant_id = js.at("participant_id").get<std::string>();
      s.record.sequence_id = js.at("sequence_id").get<std::string>();
      s.record.completed = js.at("completed").get<bool>();
      s.seed = js.at("seed").get<std::uint64_t>();
      for (const auto& ev : js.at("events")) {
        const int slot = ev.at("slot").get<int>();
        s.record.events.push_back(
            {s.record.session_id, slot, ev.at("pressed").get<bool>(), ev.at("latency_ms").get<std::int64_t>()});
        s.acks[slot] = ResponseAck{s.record.session_id, slot, ev.at("correct").get<bool>(),
                                   ev.at("offset").get<std::uint64_t>(), ev.at("ts").get<std::int64_t>()};
      }
      sessions.emplace(s.record.session_id, std::move(s));
    }
  }

  void write_snapshot() {
    const fs::path tmp = dir / (std::string(kSnapshotFile) + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << json{{"offset", log->last_offset()}, {"state", state()}}.dump() << '\n';
      out.flush();
      if (!out) return;  // a missing snapshot only costs replay time
    }
    fs::rename(tmp, dir / kSnapshotFile);
    snapshot_offset = log->last_offset();
  }

  /// Loads the snapshot if it is usable, then applies the log tail.
  void load() {
    log = std::make_unique<EventLog>(dir / kLogFile);
    std::uint64_t after = 0;
    std::ifstream in(dir / kSnapshotFile, std::ios::binary);
    if (in) {
      try {
        const json snap = json::parse(in);
        const auto offset = snap.at("offset").get<std::uint64_t>();
        if (offset <= log->last_offset()) {
          restore(snap.at("state"));
          after = offset;
        }
      } catch (const std::exception&) {
        config = {};  // unusable snapshot: replay everything
        sequences.clear();
        sessions.clear();
      }
    }
    for (const LogEntry& e : log->read(after)) apply(e);
    snapshot_offset = after;
    if (config.experiment_id.empty()) fail(ErrorCode::kFormatError, (dir / kLogFile).string() + " has no experiment");
  }
};

ExperimentService::ExperimentService(fs::path data_dir, ServiceOptions options)
    : data_dir_(std::move(data_dir)), options_(std::move(options)) {
  fs::create_directories(data_dir_);
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(data_dir_)) {
    if (entry.is_directory() && fs::exists(entry.path() / kLogFile)) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    auto exp = std::make_unique<Experiment>();
    exp->dir = dir;
    exp->load();
    for (const auto& [sid, s] : exp->sessions) session_owner_.emplace(sid, exp->config.experiment_id);
    const std::string id = exp->config.experiment_id;
    experiments_.emplace(id, std::move(exp));
  }
}

ExperimentService::~ExperimentService() = default;

std::int64_t ExperimentService::now() const {
  if (options_.clock) return options_.clock();
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

ExperimentService::Experiment& ExperimentService::find_experiment(const std::string& experiment_id) const {
  std::shared_lock lock(mutex_);
  const auto it = experiments_.find(experiment_id);
  if (it == experiments_.end()) fail(ErrorCode::kNotFound, "unknown experiment '" + experiment_id + "'");
  return *it->second;
}

ExperimentService::Experiment& ExperimentService::experiment_of_session(const std::string& session_id) const {
  std::string owner;
  {
    std::shared_lock lock(mutex_);
    const auto it = session_owner_.find(session_id);
    if (it == session_owner_.end()) fail(ErrorCode::kNotFound, "unknown session '" + session_id + "'");
    owner = it->second;
  }
  return find_experiment(owner);
}

std::string ExperimentService::create_experiment(ExperimentConfig config) {
  config.params.validate();
  if (config.max_sessions < 1) fail(ErrorCode::kInvalidInput, "max_sessions must be >= 1");
  if (config.fixed_sequence) {
    const auto violations = protocol::validate_sequence(*config.fixed_sequence);
    if (!violations.empty()) {
      fail(ErrorCode::kInvalidInput, "fixed sequence is invalid: " + std::string(to_string(violations[0].rule)) +
                                         " " + violations[0].detail);
    }
    config.params = config.fixed_sequence->params;
  } else {
    // Fails early on a pool that cannot produce a sequence.
    protocol::generate_sequence(config.pool, config.params, 0);
  }
  if (!config.seed) config.seed = (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();

  std::unique_lock lock(mutex_);
  if (config.experiment_id.empty()) {
    do {
      config.experiment_id = "exp-" + std::to_string(next_generated_id_++);
    } while (experiments_.count(config.experiment_id) || fs::exists(data_dir_ / config.experiment_id));
  }
  if (!valid_id(config.experiment_id)) {
    fail(ErrorCode::kInvalidInput, "experiment id must be 1-64 characters from [A-Za-z0-9_-]");
  }
  if (experiments_.count(config.experiment_id) || fs::exists(data_dir_ / config.experiment_id / kLogFile)) {
    fail(ErrorCode::kConflict, "experiment '" + config.experiment_id + "' already exists");
  }
  auto exp = std::make_unique<Experiment>();
  exp->dir = data_dir_ / config.experiment_id;
  fs::create_directories(exp->dir);
  exp->log = std::make_unique<EventLog>(exp->dir / kLogFile);
  const LogEntry entry = exp->log->append("experiment_created", json{{"config", codec::to_json(config)}}, now());
  exp->apply(entry);
  const std::string id = config.experiment_id;
  experiments_.emplace(id, std::move(exp));
  return id;
}

std::vector<std::string> ExperimentService::experiment_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, e] : experiments_) ids.push_back(id);
  return ids;
}

ExperimentConfig ExperimentService::experiment_config(const std::string& experiment_id) const {
  Experiment& exp = find_experiment(experiment_id);
  std::lock_guard lock(exp.mutex);
  return exp.config;
}

namespace {

SessionDescriptor describe(const ExperimentConfig& config, const Session& s, const protocol::TrialSequence& seq) {
  SessionDescriptor d;
  d.session_id = s.record.session_id;
  d.experiment_id = config.experiment_id;
  d.participant_id = s.record.participant_id;
  d.sequence_id = seq.sequence_id;
  d.seed = s.seed;
  d.display_ms = seq.params.display_ms;
  d.gap_ms = seq.params.gap_ms;
  d.completed = s.record.completed;
  for (const auto& p : seq.presentations) {
    d.slots.push_back({p.slot, "/stimuli/s/" + s.record.session_id + "/" + std::to_string(p.slot)});
  }
  return d;
}

}  // namespace

SessionDescriptor ExperimentService::create_session(const std::string& experiment_id,
                                                    const std::string& participant_id) {
  if (participant_id.empty()) fail(ErrorCode::kInvalidInput, "participant_id is required");
  Experiment& exp = find_experiment(experiment_id);
  std::lock_guard lock(exp.mutex);
  const std::size_t index = exp.sessions.size();
  if (index >= static_cast<std::size_t>(exp.config.max_sessions)) {
    fail(ErrorCode::kConflict, "experiment '" + experiment_id + "' is full (" +
                                   std::to_string(exp.config.max_sessions) + " sessions)");
  }
  const std::string session_id = session_id_for(experiment_id, index);
  const std::uint64_t seed = derive_seed(*exp.config.seed, index);
  const protocol::TrialSequence seq = exp.config.fixed_sequence
                                          ? *exp.config.fixed_sequence
                                          : protocol::generate_sequence(exp.config.pool, exp.config.params, seed);
  const LogEntry entry = exp.log->append("session_created",
                                         json{{"session_id", session_id},
                                              {"participant_id", participant_id},
                                              {"seed", seed},
                                              {"sequence", codec::to_json(seq)}},
                                         now());
  exp.apply(entry);
  {
    std::unique_lock service_lock(mutex_);
    session_owner_.emplace(session_id, experiment_id);
  }
  if (options_.snapshot_every > 0 &&
      exp.log->last_offset() - exp.snapshot_offset >= static_cast<std::uint64_t>(options_.snapshot_every)) {
    exp.write_snapshot();
  }
  const Session& s = exp.sessions.at(session_id);
  return describe(exp.config, s, exp.sequence_of(s));
}

SessionDescriptor ExperimentService::schedule(const std::string& session_id) const {
  Experiment& exp = experiment_of_session(session_id);
  std::lock_guard lock(exp.mutex);
  const Session& s = exp.session(session_id);
  return describe(exp.config, s, exp.sequence_of(s));
}

ResponseAck ExperimentService::record_response(const std::string& session_id, int slot, bool pressed,
                                               std::int64_t latency_ms) {
  Experiment& exp = experiment_of_session(session_id);
  std::lock_guard lock(exp.mutex);
  Session& s = exp.session(session_id);
  if (s.record.completed) fail(ErrorCode::kGone, "session '" + session_id + "' is closed");
  const auto& seq = exp.sequence_of(s);
  if (slot < 0 || static_cast<std::size_t>(slot) >= seq.presentations.size()) {
    fail(ErrorCode::kInvalidInput, "slot " + std::to_string(slot) + " is outside the session's " +
                                       std::to_string(seq.presentations.size()) + " slots");
  }
  if (latency_ms < 0) fail(ErrorCode::kInvalidInput, "latency_ms must be >= 0");
  if (const auto it = s.acks.find(slot); it != s.acks.end()) return it->second;
  const bool correct = pressed == seq.presentations[static_cast<std::size_t>(slot)].is_repeat;
  const LogEntry entry = exp.log->append("response",
                                         json{{"session_id", session_id},
                                              {"slot", slot},
                                              {"pressed", pressed},
                                              {"latency_ms", latency_ms},
                                              {"correct", correct}},
                                         now());
  exp.apply(entry);
  if (options_.snapshot_every > 0 &&
      exp.log->last_offset() - exp.snapshot_offset >= static_cast<std::uint64_t>(options_.snapshot_every)) {
    exp.write_snapshot();
  }
  return s.acks.at(slot);
}

protocol::SessionScore ExperimentService::complete_session(const std::string& session_id) {
  Experiment& exp = experiment_of_session(session_id);
  std::lock_guard lock(exp.mutex);
  Session& s = exp.session(session_id);
  protocol::SessionRecord closed = s.record;
  closed.completed = true;
  const auto score = protocol::score_session(exp.sequence_of(s), closed, exp.config.attentiveness);
  if (!s.record.completed) {
    const LogEntry entry = exp.log->append(
        "session_completed", json{{"session_id", session_id}, {"score", codec::to_json(score)}}, now());
    exp.apply(entry);
  }
  return score;
}

std::string ExperimentService::export_data(const std::string& experiment_id, ExportFormat format,
                                           ExportWhat what) const {
  Experiment& exp = find_experiment(experiment_id);
  std::lock_guard lock(exp.mutex);
  io::Bundle bundle;
  for (const auto& [id, s] : exp.sessions) {
    if (!s.record.completed) continue;
    bundle.sessions.push_back(s.record);
    bundle.sequences.emplace(s.record.sequence_id, exp.sequence_of(s));
  }
  if (bundle.sessions.empty()) {
    fail(ErrorCode::kEmptyAggregate, "experiment '" + experiment_id + "' has no completed sessions");
  }
  std::ostringstream out;
  if (format == ExportFormat::kJsonl) {
    io::write_bundle_jsonl(out, bundle);
    return out.str();
  }
  const auto agg = protocol::aggregate_scores(bundle.sequences, bundle.sessions, exp.config.attentiveness);
  if (what == ExportWhat::kTable) {
    io::write_table_csv(out, agg.table);
  } else {
    io::write_matrix_csv(out, agg.matrix);
  }
  return out.str();
}

std::string ExperimentService::stimulus_uri(const std::string& session_id, int slot) const {
  Experiment& exp = experiment_of_session(session_id);
  std::lock_guard lock(exp.mutex);
  const Session& s = exp.session(session_id);
  const auto& seq = exp.sequence_of(s);
  if (slot < 0 || static_cast<std::size_t>(slot) >= seq.presentations.size()) {
    fail(ErrorCode::kNotFound, "no slot " + std::to_string(slot) + " in session '" + session_id + "'");
  }
  const auto* item = seq.find_item(seq.presentations[static_cast<std::size_t>(slot)].item_id);
  return item ? item->image_uri : std::string();
}

void ExperimentService::snapshot_all() {
  std::shared_lock lock(mutex_);
  for (auto& [id, exp] : experiments_) {
    std::lock_guard exp_lock(exp->mutex);
    exp->write_snapshot();
  }
}

}  // namespace memlab::server
