#pragma once

// Flat `key = value` text files. '#' starts a comment; blank lines are
// ignored; keys are unique.

#include <cstdlib>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "doqos/errors.hpp"

namespace doqos {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline KeyValues parse_key_values(std::istream& in, const std::string& source = "<config>") {
  KeyValues out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where, "expected 'key = value'");
    std::string key = detail::trim(std::string_view(body).substr(0, eq));
    std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(where, "empty key");
    for (const auto& [k, v] : out) {
      if (k == key) throw ConfigError(key, "duplicate key at " + where);
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

inline KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_key_values(in, path);
}

/// Strict numeric parse; the whole string must be consumed.
inline double parse_real(const std::string& field, const std::string& text) {
  const std::string t = detail::trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw ConfigError(field, "expected a number, got '" + text + "'");
  }
  return v;
}

inline long long parse_integer(const std::string& field, const std::string& text) {
  const std::string t = detail::trim(text);
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw ConfigError(field, "expected an integer, got '" + text + "'");
  }
  return v;
}

inline std::vector<double> parse_real_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : detail::split(text, ',')) out.push_back(parse_real(field, item));
  return out;
}

}  // namespace doqos
