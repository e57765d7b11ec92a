#include "memlab/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

#include "memlab/error.hpp"

namespace memlab::io {
namespace {

// Parses one logical record; returns false at end of input.
bool read_record(std::istream& in, CsvRow& fields, std::size_t& line_no) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  ++line_no;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0;; ++i) {
    if (i == line.size()) {
      if (quoted) {
        std::string next;
        if (!std::getline(in, next)) fail(ErrorCode::kFormatError, "unterminated quote at line " + std::to_string(line_no));
        ++line_no;
        field += '\n';
        line = std::move(next);
        i = static_cast<std::size_t>(-1);
        continue;
      }
      break;
    }
    const char c = line[i];
    any = true;
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' && i + 1 == line.size()) {
      // CRLF
    } else {
      field += c;
    }
  }
  if (!any && fields.empty()) return read_record(in, fields, line_no);  // skip blank lines
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t CsvTable::require_column(std::string_view name) const {
  const auto c = column(name);
  if (!c) fail(ErrorCode::kFormatError, "CSV is missing column '" + std::string(name) + "'");
  return *c;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::size_t line_no = 0;
  if (!read_record(in, table.header, line_no)) fail(ErrorCode::kFormatError, "CSV has no header row");
  if (!table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0) table.header[0].erase(0, 3);
  CsvRow row;
  while (read_record(in, row, line_no)) {
    if (row.size() != table.header.size()) {
      fail(ErrorCode::kFormatError, "CSV line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                                        " fields, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(row);
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kInvalidInput, "cannot open " + path.string());
  return read_csv(in);
}

void write_csv_row(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

std::string format_number(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, end);
}

double parse_number(std::string_view text, std::string_view context) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty() || !std::isfinite(value)) {
    fail(ErrorCode::kFormatError, std::string(context) + ": '" + std::string(text) + "' is not a finite number");
  }
  return value;
}

std::int64_t parse_integer(std::string_view text, std::string_view context) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    fail(ErrorCode::kFormatError, std::string(context) + ": '" + std::string(text) + "' is not an integer");
  }
  return value;
}

std::vector<int> parse_int_list(std::string_view text, std::string_view context) {
  std::vector<int> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view piece = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    values.push_back(static_cast<int>(parse_integer(piece, context)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return values;
}

}  // namespace memlab::io
