#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memlab::io {

/// Comma-separated, '.' decimal point, mandatory header row, UTF-8, LF line
/// ends (CRLF accepted on input). Fields containing ',', '"' or a newline are
/// double-quoted on output.
using CsvRow = std::vector<std::string>;

struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;

  std::optional<std::size_t> column(std::string_view name) const;
  /// Throws FormatError if the column is absent.
  std::size_t require_column(std::string_view name) const;
};

/// Throws FormatError on a missing header, unterminated quotes or rows whose
/// width differs from the header.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

void write_csv_row(std::ostream& out, std::span<const std::string> fields);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Strict parsers; throw FormatError naming `context` on failure. NaN and
/// infinities are rejected.
double parse_number(std::string_view text, std::string_view context);
std::int64_t parse_integer(std::string_view text, std::string_view context);

/// Comma-separated integer list, e.g. "40,100,135". Empty entries are errors.
std::vector<int> parse_int_list(std::string_view text, std::string_view context);

}  // namespace memlab::io
