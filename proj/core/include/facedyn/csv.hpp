#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace facedyn::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by exact header name, or nullopt.
  std::optional<std::size_t> column(const std::string& name) const;
};

/// Reads a comma-separated table. Cells are trimmed of surrounding
/// whitespace (OpenFace emits ", "-separated files) and CRLF is tolerated.
Table read(std::istream& in);
Table read_file(const std::string& path);

/// Parses a cell as double; throws ParseError naming row/column on failure.
double to_double(const std::string& cell, std::size_t row_index,
                 const std::string& column_name);

/// Full-precision float formatting (%.17g) so round-trips are exact.
std::string format_double(double value);

void write_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace facedyn::csv
