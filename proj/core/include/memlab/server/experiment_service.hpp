#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "memlab/protocol/types.hpp"

namespace memlab::server {

struct ExperimentConfig {
  std::string experiment_id;  // generated when empty; [A-Za-z0-9_-], at most 64 chars
  std::vector<protocol::StimulusItem> pool;
  /// Randomized unless params.fixed_order is set.
  protocol::SequenceParams params;
  /// Serves this exact sequence to every session, overriding params.
  std::optional<protocol::TrialSequence> fixed_sequence;
  protocol::Attentiveness attentiveness;
  int max_sessions = 120;
  /// Master seed for per-session sequence seeds; drawn from the OS when unset.
  std::optional<std::uint64_t> seed;
};

struct ScheduleSlot {
  int slot = 0;
  std::string image_uri;  // opaque per-slot locator; repeats are not recognisable from it
};

/// What a client needs to run a session. Never says which slots are repeats.
struct SessionDescriptor {
  std::string session_id;
  std::string experiment_id;
  std::string participant_id;
  std::string sequence_id;
  std::uint64_t seed = 0;
  int display_ms = 0;
  int gap_ms = 0;
  bool completed = false;
  std::vector<ScheduleSlot> slots;
};

struct ResponseAck {
  std::string session_id;
  int slot = 0;
  bool correct = false;  // the press (or non-press) matched whether the slot was a repeat
  std::uint64_t offset = 0;  // log offset of the recorded event
  std::int64_t received_ms = 0;

  bool operator==(const ResponseAck&) const = default;
};

enum class ExportFormat { kCsv, kJsonl };
enum class ExportWhat { kTable, kMatrix };

struct ServiceOptions {
  /// Write a snapshot after this many log entries since the last one; 0 disables.
  int snapshot_every = 256;
  /// Milliseconds since epoch; the system clock when empty.
  std::function<std::int64_t()> clock;
};

/// Owns experiments under `data_dir`, one directory each holding an
/// append-only events.jsonl and an optional snapshot.json. Construction
/// replays every experiment found there. Operations on one experiment are
/// serialized; different experiments proceed independently.
class ExperimentService {
 public:
  explicit ExperimentService(std::filesystem::path data_dir, ServiceOptions options = {});
  ~ExperimentService();
  ExperimentService(const ExperimentService&) = delete;
  ExperimentService& operator=(const ExperimentService&) = delete;

  /// Returns the experiment id. Throws InvalidInput for a bad config and
  /// Conflict when the id is taken.
  std::string create_experiment(ExperimentConfig config);
  std::vector<std::string> experiment_ids() const;
  ExperimentConfig experiment_config(const std::string& experiment_id) const;

  /// Throws NotFound for an unknown experiment and Conflict at capacity.
  SessionDescriptor create_session(const std::string& experiment_id, const std::string& participant_id);
  SessionDescriptor schedule(const std::string& session_id) const;

  /// Records one response exactly once per (session, slot); a retry returns
  /// the original ack without logging. Throws NotFound, Gone for a completed
  /// session and InvalidInput for an out-of-range slot or negative latency.
  ResponseAck record_response(const std::string& session_id, int slot, bool pressed, std::int64_t latency_ms);

  /// Closes the session and scores it. Idempotent. Throws NotFound.
  protocol::SessionScore complete_session(const std::string& session_id);

  /// Aggregate of completed sessions, byte-identical for an unchanged log.
  /// CSV gives the table or the matrix; JSONL gives the sequences and
  /// completed sessions in the sequence/session line format. Throws NotFound
  /// and EmptyAggregate.
  std::string export_data(const std::string& experiment_id, ExportFormat format, ExportWhat what) const;

  /// Image locator behind a schedule slot. Throws NotFound.
  std::string stimulus_uri(const std::string& session_id, int slot) const;

  /// Writes a snapshot of every experiment now.
  void snapshot_all();

  const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

  struct Experiment;

 private:
  Experiment& find_experiment(const std::string& experiment_id) const;
  Experiment& experiment_of_session(const std::string& session_id) const;
  std::int64_t now() const;

  std::filesystem::path data_dir_;
  ServiceOptions options_;
  mutable std::shared_mutex mutex_;  // guards the two maps below
  std::map<std::string, std::unique_ptr<Experiment>, std::less<>> experiments_;
  std::map<std::string, std::string, std::less<>> session_owner_;
  int next_generated_id_ = 1;
};

}  // namespace memlab::server
