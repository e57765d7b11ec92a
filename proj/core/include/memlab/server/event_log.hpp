#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace memlab::server {

/// One line of an experiment log.
struct LogEntry {
  std::uint64_t offset = 0;  // 1, 2, 3, ... within one log
  std::int64_t ts_ms = 0;    // server receive time, ms since epoch
  std::string type;
  nlohmann::ordered_json payload;

  nlohmann::ordered_json to_json() const;
  /// Throws FormatError on missing or mistyped fields.
  static LogEntry from_json(const nlohmann::ordered_json& j);
};

/// Append-only line-delimited JSON log. Every append is flushed and synced
/// before it returns. Opening the log scans it: a final line without its
/// newline, or one that fails to parse, is a torn write and is cut off; any
/// other damage throws FormatError.
class EventLog {
 public:
  explicit EventLog(std::filesystem::path path);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  /// Entries currently in the file with offset > after, in order.
  std::vector<LogEntry> read(std::uint64_t after = 0) const;

  /// Writes one entry and returns it.
  LogEntry append(std::string type, nlohmann::ordered_json payload, std::int64_t ts_ms);

  std::uint64_t last_offset() const noexcept { return last_offset_; }
  const std::filesystem::path& path() const noexcept { return path_; }
  /// Bytes cut from a torn tail when the log was opened.
  std::uintmax_t repaired_bytes() const noexcept { return repaired_bytes_; }

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::uint64_t last_offset_ = 0;
  std::uintmax_t repaired_bytes_ = 0;
};

}  // namespace memlab::server
