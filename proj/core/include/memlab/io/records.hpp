#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "memlab/protocol/simulate.hpp"
#include "memlab/protocol/types.hpp"
#include "memlab/stats/response_matrix.hpp"

namespace memlab::io {

/// Pool manifest CSV: `item_id,image_uri,role` with role one of target,
/// filler, vigilance.
std::vector<protocol::StimulusItem> read_pool_csv(std::istream& in);
std::vector<protocol::StimulusItem> read_pool_file(const std::filesystem::path& path);
void write_pool_csv(std::ostream& out, const std::vector<protocol::StimulusItem>& pool);

/// Sequences and sessions share one line-delimited JSON format. Each line is
/// an object with a "type" of "presentation" (the default when absent),
/// "session" or "event". Field lists are in docs/formats.md.
struct Bundle {
  protocol::SequenceLibrary sequences;
  std::vector<protocol::SessionRecord> sessions;  // in file order
};

void write_sequence_jsonl(std::ostream& out, const protocol::TrialSequence& sequence);
void write_session_jsonl(std::ostream& out, const protocol::SessionRecord& session);
/// Every sequence (in id order) followed by every session with its events.
void write_bundle_jsonl(std::ostream& out, const Bundle& bundle);

/// Throws FormatError naming the line on malformed JSON, missing fields,
/// conflicting sequence headers, duplicate sessions or events of undeclared
/// sessions.
Bundle read_bundle_jsonl(std::istream& in);
/// Reads and merges several files.
Bundle read_bundle_files(const std::vector<std::filesystem::path>& paths);

/// Header `item_id,score,n_observers,variance,false_alarms`.
void write_table_csv(std::ostream& out, const protocol::MemorabilityTable& table);
protocol::MemorabilityTable read_table_csv(std::istream& in);

/// Header `participant_id,<target ids...>`; cells 1, 0, or empty for missing.
void write_matrix_csv(std::ostream& out, const stats::ResponseMatrix& m);
stats::ResponseMatrix read_matrix_csv(std::istream& in);

/// item_id -> value. Uses the `score` column when present, else `p`, else
/// `prediction`, else the second of exactly two columns. Throws FormatError otherwise or on duplicate ids.
std::map<std::string, double, std::less<>> read_scores_csv(std::istream& in);
std::map<std::string, double, std::less<>> read_scores_file(const std::filesystem::path& path);

/// `order_id,item_id,delta`.
protocol::OrderEffect read_order_effect_csv(std::istream& in);

/// Opens `path` for reading; throws InvalidInput when it cannot.
std::ifstream open_input(const std::filesystem::path& path);

}  // namespace memlab::io
