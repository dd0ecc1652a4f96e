#pragma once

// Minimal RFC 4180 style reader/writer used by the file formats of this
// project. Fields may be quoted; quoted fields may contain commas and "".

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phaseplan::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row, for diagnostics.
  std::vector<std::size_t> lines;

  /// Index of a header column, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
  /// Like column() but throws Error{ParseError} when missing.
  std::size_t require_column(std::string_view name) const;
};

/// Blank lines are skipped. Every row must have the header's width.
Table parse(std::string_view text);

double to_double(std::string_view field, std::size_t line, std::string_view column);
std::int64_t to_int(std::string_view field, std::size_t line, std::string_view column);
std::optional<double> to_optional_double(std::string_view field, std::size_t line, std::string_view column);

std::string escape(std::string_view field);
/// Fixed-point with four fractional digits.
std::string fixed4(double value);

}  // namespace phaseplan::csv
