#pragma once

#include <string>
#include <vector>

namespace lissnas::csv {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// RFC 4180 subset: comma separated, optional double quotes with "" escapes,
/// no embedded newlines. Throws ParseError with the line number.
Table read_file(const std::string& path);
Table parse(const std::string& text);

std::string quote(const std::string& field);
/// Shortest representation that parses back to the same double.
std::string format_double(double value);
double parse_double(const std::string& field, std::size_t line);

void write_file(const std::string& path, const std::string& content);

}  // namespace lissnas::csv
