#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace alctrie {

/// Empty, integer, real or text cell. Empty cells print as "NA".
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

/// Shortest "%g" form that parses back to the same double.
std::string format_number(double value);
std::string format_cell(const Cell& cell);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Throws std::invalid_argument when the row width does not match.
  void add_row(std::vector<Cell> row);
  void write_csv(std::ostream& out) const;
};

}  // namespace alctrie
