#include "memlab/server/event_log.hpp"

#include <cerrno>
#include <fstream>
#include <iterator>
#include <system_error>

#include <unistd.h>

#include "memlab/error.hpp"

namespace memlab::server {
namespace {

using json = nlohmann::ordered_json;

struct Scan {
  std::vector<LogEntry> entries;
  std::uintmax_t good_bytes = 0;
  std::uintmax_t total_bytes = 0;
};

Scan scan(const std::filesystem::path& path) {
  Scan s;
  std::ifstream in(path, std::ios::binary);
  if (!in) return s;
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  s.total_bytes = text.size();
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    ++line_no;
    const std::size_t end = text.find('\n', pos);
    const bool last = end == std::string::npos || end + 1 == text.size();
    if (end == std::string::npos) break;  // torn: no newline
    LogEntry entry;
    try {
      entry = LogEntry::from_json(json::parse(text.begin() + static_cast<std::ptrdiff_t>(pos),
                                              text.begin() + static_cast<std::ptrdiff_t>(end)));
    } catch (const std::exception& e) {
      if (last) break;  // torn final line
      fail(ErrorCode::kFormatError,
           path.string() + ": line " + std::to_string(line_no) + " is corrupt: " + e.what());
    }
    const std::uint64_t expected = s.entries.empty() ? 1 : s.entries.back().offset + 1;
    if (entry.offset != expected) {
      fail(ErrorCode::kFormatError, path.string() + ": line " + std::to_string(line_no) + " has offset " +
                                        std::to_string(entry.offset) + ", expected " + std::to_string(expected));
    }
    s.entries.push_back(std::move(entry));
    pos = end + 1;
    s.good_bytes = pos;
  }
  return s;
}

}  // namespace

json LogEntry::to_json() const {
  json j;
  j["offset"] = offset;
  j["ts"] = ts_ms;
  j["type"] = type;
  j["payload"] = payload;
  return j;
}

LogEntry LogEntry::from_json(const json& j) {
  try {
    LogEntry e;
    e.offset = j.at("offset").get<std::uint64_t>();
    e.ts_ms = j.at("ts").get<std::int64_t>();
    e.type = j.at("type").get<std::string>();
    e.payload = j.at("payload");
    return e;
  } catch (const json::exception& ex) {
    fail(ErrorCode::kFormatError, std::string("malformed log entry: ") + ex.what());
  }
}

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) {
  const Scan s = scan(path_);
  if (s.good_bytes < s.total_bytes) {
    std::filesystem::resize_file(path_, s.good_bytes);
    repaired_bytes_ = s.total_bytes - s.good_bytes;
  }
  last_offset_ = s.entries.empty() ? 0 : s.entries.back().offset;
  file_ = std::fopen(path_.c_str(), "ab");
  if (!file_) fail(ErrorCode::kInvalidInput, "cannot open log " + path_.string());
}

EventLog::~EventLog() {
  if (file_) std::fclose(file_);
}

std::vector<LogEntry> EventLog::read(std::uint64_t after) const {
  std::vector<LogEntry> out;
  for (auto& e : scan(path_).entries) {
    if (e.offset > after) out.push_back(std::move(e));
  }
  return out;
}

LogEntry EventLog::append(std::string type, json payload, std::int64_t ts_ms) {
  LogEntry entry{last_offset_ + 1, ts_ms, std::move(type), std::move(payload)};
  const std::string line = entry.to_json().dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0 ||
      ::fsync(::fileno(file_)) != 0) {
    throw std::system_error(errno, std::generic_category(), "failed to append to " + path_.string());
  }
  last_offset_ = entry.offset;
  return entry;
}

}  // namespace memlab::server
