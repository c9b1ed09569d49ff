#include "voiceaudit/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "voiceaudit/error.hpp"

namespace voiceaudit::csv {

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::string::npos;
}

std::size_t Table::require_column(std::string_view name, const std::string& source) const {
  const auto idx = column(name);
  if (idx == std::string::npos) {
    throw ParseError(source, 1, "missing column '" + std::string(name) + "'");
  }
  return idx;
}

namespace {

// Parses one record starting at the current stream position. Returns false at
// end of input. `line` is advanced by the number of physical lines consumed.
bool read_record(std::istream& in, Row& row, std::size_t& line, const std::string& source) {
  row.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  const std::size_t start_line = line + 1;
  int ch;
  while ((ch = in.get()) != std::char_traits<char>::eof()) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty()) {
        throw ParseError(source, start_line, "stray quote inside unquoted field");
      }
      in_quotes = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      // tolerated before LF
    } else if (c == '\n') {
      ++line;
      row.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw ParseError(source, start_line, "unterminated quoted field");
  if (!any) return false;
  ++line;
  row.push_back(std::move(field));
  return true;
}

}  // namespace

Table read(std::istream& in, const std::string& source) {
  Table table;
  std::size_t line = 0;
  Row row;
  // skip blank lines before the header
  while (read_record(in, row, line, source)) {
    if (row.size() == 1 && row[0].empty()) continue;
    table.header = row;
    break;
  }
  while (true) {
    const std::size_t row_line = line + 1;
    if (!read_record(in, row, line, source)) break;
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != table.header.size()) {
      throw ParseError(source, row_line,
                       "expected " + std::to_string(table.header.size()) + " fields, got " +
                           std::to_string(row.size()));
    }
    table.rows.push_back(row);
    table.lines.push_back(row_line);
  }
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read(in, path);
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << escape(row[i]);
  }
  out << '\n';
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw Error("cannot format double");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text, const std::string& source, std::size_t line) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw ParseError(source, line, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

long long parse_int(std::string_view text, const std::string& source, std::size_t line) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError(source, line, "not an integer: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace voiceaudit::csv
