#pragma once

// Number formatting and delimited-text output.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "hotrep/errors.hpp"

namespace hotrep {

/// Shortest decimal string that parses back to exactly `v`.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Fixed number of significant digits, for human-readable reports.
inline std::string format_sig(double v, int digits = 6) {
  if (!std::isfinite(v)) return format_double(v);
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty())
    throw ValidationError(context + ": '" + std::string(s) + "' is not a number");
  return v;
}

enum class TableFormat { Csv, Tsv };

inline char separator(TableFormat f) { return f == TableFormat::Csv ? ',' : '\t'; }

/// Writes rows of already formatted cells, LF line endings.
class TableWriter {
 public:
  TableWriter(std::ostream& os, TableFormat f) : os_(os), sep_(separator(f)) {}

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os_ << sep_;
      os_ << cells[i];
    }
    os_ << '\n';
  }

 private:
  std::ostream& os_;
  char sep_;
};

/// Splits one delimited line; no quoting is supported.
inline std::vector<std::string> split_line(std::string_view line, char sep) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace hotrep
