#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace stratexp {

using CsvRow = std::vector<std::string>;

/// Parsed CSV with a mandatory header row. `lines[n]` is the 1-based source
/// line on which row n starts.
struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;
  std::vector<std::size_t> lines;

  /// Column index by name; throws DataError when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF, embedded
/// newlines in quotes. Blank lines are skipped. Rows whose width differs from
/// the header raise DataError with the line number; `source` names the input
/// in messages.
CsvTable read_csv(std::istream& in, std::string_view source = "<stream>");
CsvTable read_csv_file(const std::string& path);

/// Writes one record, quoting fields that contain a comma, quote or newline.
void write_csv_row(std::ostream& out, const CsvRow& row);

/// Shortest round-trip decimal form (%.17g).
std::string format_double(double value);

/// Strict numeric parses; throw DataError naming source, line and column.
double parse_double(std::string_view text, std::string_view source, std::size_t line, std::string_view column);
long long parse_integer(std::string_view text, std::string_view source, std::size_t line, std::string_view column);

}  // namespace stratexp
