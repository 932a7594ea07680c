#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "drsync/error.hpp"

namespace drsync::csv {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line_no) {
  text = trim(text);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(Errc::input, "line " + std::to_string(line_no) + ": cannot parse '" +
                                 std::string(text) + "'");
  }
  return value;
}

inline bool parse_bool(std::string_view text, std::size_t line_no) {
  text = trim(text);
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw Error(Errc::input,
              "line " + std::to_string(line_no) + ": expected boolean, got '" + std::string(text) + "'");
}

/// Reads the header line and checks it matches `expected` exactly.
inline void expect_header(std::istream& in, std::string_view expected) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::input, "missing CSV header");
  if (trim(line) != expected) {
    throw Error(Errc::input, "unexpected CSV header '" + line + "', want '" + std::string(expected) + "'");
  }
}

}  // namespace drsync::csv
