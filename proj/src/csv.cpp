#include "stratexp/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "stratexp/errors.hpp"

namespace stratexp {

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(std::string_view name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

CsvTable read_csv(std::istream& in, std::string_view source) {
  CsvTable table;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  bool saw_header = false;
  std::size_t line = 1;
  std::size_t row_line = 1;

  auto finish_row = [&]() {
    const bool blank = row.empty() && field.empty() && !field_started;
    if (!blank) {
      row.push_back(std::move(field));
      if (!saw_header) {
        table.header = std::move(row);
        saw_header = true;
      } else {
        if (row.size() != table.header.size()) {
          throw DataError(std::string(source) + ":" + std::to_string(row_line) + ": expected " +
                          std::to_string(table.header.size()) + " fields, found " + std::to_string(row.size()));
        }
        table.rows.push_back(std::move(row));
        table.lines.push_back(row_line);
      }
    }
    row.clear();
    field.clear();
    field_started = false;
  };

  char c = 0;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        finish_row();
        ++line;
        row_line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted) throw DataError(std::string(source) + ":" + std::to_string(row_line) + ": unterminated quoted field");
  finish_row();
  if (!saw_header) throw DataError(std::string(source) + ": empty file (no header row)");
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in, path);
}

void write_csv_row(std::ostream& out, const CsvRow& row) {
  for (std::size_t n = 0; n < row.size(); ++n) {
    if (n) out << ',';
    const auto& f = row[n];
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
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

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(std::string_view text, std::string_view source, std::size_t line, std::string_view column) {
  const std::string s(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw DataError(std::string(source) + ":" + std::to_string(line) + ": column '" + std::string(column) +
                    "': malformed number '" + s + "'");
  }
  return v;
}

long long parse_integer(std::string_view text, std::string_view source, std::size_t line, std::string_view column) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError(std::string(source) + ":" + std::to_string(line) + ": column '" + std::string(column) +
                    "': malformed integer '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace stratexp
