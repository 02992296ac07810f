// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_DETAIL_FORMAT_HPP
#define LSTAB_DETAIL_FORMAT_HPP

#include <charconv>
#include <string>
#include <system_error>

namespace lstab::detail {

/// Shortest decimal that round-trips to the same double. Used by every text
/// exporter so rebuilds are byte-identical.
inline std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline double parse_double(const std::string& s, bool& ok) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  ok = (ec == std::errc() && ptr == s.data() + s.size());
  return v;
}

}  // namespace lstab::detail

#endif
