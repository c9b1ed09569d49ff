#pragma once

// Minimal RFC 4180 CSV reading/writing. Fields containing a comma, quote,
// CR or LF are quoted; embedded quotes are doubled.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace voiceaudit::csv {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;
  /// 1-based source line of each row, for diagnostics.
  std::vector<std::size_t> lines;

  /// Index of a header column, or npos.
  std::size_t column(std::string_view name) const;
  /// Index of a header column; throws ParseError if absent.
  std::size_t require_column(std::string_view name, const std::string& source) const;
};

/// Reads a CSV stream whose first record is a header. Every row must have the
/// header's field count. An empty stream yields an empty header and no rows.
Table read(std::istream& in, const std::string& source);
Table read_file(const std::string& path);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

/// Shortest round-trip decimal representation.
std::string format_double(double value);
double parse_double(std::string_view text, const std::string& source, std::size_t line);
long long parse_int(std::string_view text, const std::string& source, std::size_t line);

}  // namespace voiceaudit::csv
