#ifndef GRADCERT_TEXT_HPP_
#define GRADCERT_TEXT_HPP_

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace gradcert::text {

/// 17 significant digits, '.' separator. Round-trips every double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// Parses one real. `offset` is the position of `token` inside the text being
/// parsed and is reported back in the error.
inline double parse_double(std::string_view token, std::size_t offset = 0, std::string_view what = "number") {
  std::size_t lead = 0;
  while (lead < token.size() && (token[lead] == ' ' || token[lead] == '\t')) ++lead;
  const std::string_view t = trim(token);
  if (!t.empty() && t.front() == '+') {
    return parse_double(t.substr(1), offset + lead + 1, what);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    const std::size_t bad = t.empty() ? 0 : static_cast<std::size_t>(ptr - t.data());
    throw ParseError("malformed " + std::string(what) + " '" + std::string(t) + "'", offset + lead + bad);
  }
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

/// Comma separated reals, e.g. "1,0,-2.5".
inline Vector parse_list(std::string_view s, std::size_t offset = 0, std::string_view what = "number") {
  Vector out;
  std::size_t pos = 0;
  for (std::string_view part : split(s, ',')) {
    out.push_back(parse_double(part, offset + pos, what));
    pos += part.size() + 1;
  }
  return out;
}

inline std::string join(ConstVectorView v, char sep = ',') {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += format_double(v[i]);
  }
  return s;
}

}  // namespace gradcert::text

#endif  // GRADCERT_TEXT_HPP_
