#include "phaseplan/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "phaseplan/error.hpp"

namespace phaseplan::csv {

namespace {

std::string where(std::size_t line, std::string_view column) {
  return "line " + std::to_string(line) + ", column '" + std::string(column) + "'";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::require_column(std::string_view name) const {
  if (auto idx = column(name)) return *idx;
  throw Error(ErrorCode::ParseError, "missing CSV column '" + std::string(name) + "'");
}

Table parse(std::string_view text) {
  Table table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_record = [&] {
    record.push_back(std::string(trim(field)));
    field.clear();
    field_started = false;
    const bool blank = record.size() == 1 && record.front().empty();
    if (!blank) {
      if (table.header.empty()) {
        table.header = std::move(record);
      } else {
        if (record.size() != table.header.size()) {
          throw Error(ErrorCode::ParseError, "line " + std::to_string(record_line) + ": expected " +
                                                 std::to_string(table.header.size()) + " fields, found " +
                                                 std::to_string(record.size()));
        }
        table.rows.push_back(std::move(record));
        table.lines.push_back(record_line);
      }
    }
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started && !trim(field).empty()) {
          throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": stray quote");
        }
        field.clear();
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::string(trim(field)));
        field.clear();
        field_started = false;
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::ParseError, "unterminated quoted field");
  if (!field.empty() || !record.empty()) end_record();
  if (table.header.empty()) throw Error(ErrorCode::ParseError, "CSV has no header");
  return table;
}

double to_double(std::string_view field, std::size_t line, std::string_view column) {
  double value = 0;
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (field.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw Error(ErrorCode::ParseError, where(line, column) + ": not a number: '" + std::string(field) + "'");
  }
  return value;
}

std::int64_t to_int(std::string_view field, std::size_t line, std::string_view column) {
  std::int64_t value = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::ParseError, where(line, column) + ": not an integer: '" + std::string(field) + "'");
  }
  return value;
}

std::optional<double> to_optional_double(std::string_view field, std::size_t line, std::string_view column) {
  if (field.empty()) return std::nullopt;
  return to_double(field, line, column);
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string fixed4(double value) {
  if (value == 0) value = 0;  // no "-0.0000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  std::string out = buf;
  if (out == "-0.0000") out = "0.0000";
  return out;
}

}  // namespace phaseplan::csv
