#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace redistrict::csv {

/// A parsed CSV file with a header row. Fields are unquoted; values must not
/// contain commas.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row, for error messages.
  std::vector<std::size_t> lines;

  /// Column index for `name`, or -1.
  int column(std::string_view name) const;
  /// Column index for `name`; throws ValidationError if missing.
  int require_column(std::string_view name) const;
};

Table read(std::istream& in, std::string_view source = "<stream>");
Table read_file(const std::filesystem::path& path);

std::vector<std::string> split_line(std::string_view line);

std::int64_t parse_int(std::string_view text, std::string_view what);
double parse_double(std::string_view text, std::string_view what);

/// Shortest round-trip decimal representation, stable across runs.
std::string format_double(double value);

}  // namespace redistrict::csv
