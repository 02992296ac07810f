// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_CONFIG_HPP
#define LSTAB_CONFIG_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lstab {

/// Flat `key = value` configuration with `[section]` headers; keys are
/// addressed as "section.key". Consumers take keys they understand and call
/// finish(), which rejects anything left over.
class RunConfig {
 public:
  static RunConfig from_stream(std::istream& in);
  static RunConfig from_file(const std::string& path);

  std::optional<std::string> take(const std::string& key);
  std::string take_or(const std::string& key, const std::string& fallback);
  double take_double(const std::string& key, double fallback);
  int take_int(const std::string& key, int fallback);
  bool take_bool(const std::string& key, bool fallback);
  void finish() const;  // throws listing unconsumed keys

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Write-temp-then-rename so partially written outputs never appear.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace lstab

#endif
