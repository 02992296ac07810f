// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#include "lstab/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lstab {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

RunConfig RunConfig::from_stream(std::istream& in) {
  RunConfig config;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": malformed section");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    config.entries_.emplace_back(section.empty() ? key : section + "." + key, value);
  }
  return config;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file `" + path + "`");
  return from_stream(in);
}

std::optional<std::string> RunConfig::take(const std::string& key) {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const auto& e) { return e.first == key; });
  if (it == entries_.end()) return std::nullopt;
  std::string value = it->second;
  entries_.erase(it);
  return value;
}

std::string RunConfig::take_or(const std::string& key, const std::string& fallback) {
  return take(key).value_or(fallback);
}

double RunConfig::take_double(const std::string& key, double fallback) {
  const auto v = take(key);
  if (!v) return fallback;
  size_t pos = 0;
  const double out = std::stod(*v, &pos);
  if (pos != v->size()) throw std::invalid_argument("config key `" + key + "`: not a number");
  return out;
}

int RunConfig::take_int(const std::string& key, int fallback) {
  const auto v = take(key);
  if (!v) return fallback;
  size_t pos = 0;
  const int out = std::stoi(*v, &pos);
  if (pos != v->size()) throw std::invalid_argument("config key `" + key + "`: not an integer");
  return out;
}

bool RunConfig::take_bool(const std::string& key, bool fallback) {
  const auto v = take(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw std::invalid_argument("config key `" + key + "`: not a boolean");
}

void RunConfig::finish() const {
  if (entries_.empty()) return;
  std::string keys;
  for (const auto& [key, value] : entries_) keys += (keys.empty() ? "" : ", ") + key;
  throw std::invalid_argument("unknown config keys: " + keys);
}

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open `" + tmp + "` for writing");
    out << content;
    if (!out) throw std::runtime_error("write to `" + tmp + "` failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("atomic rename to `" + path + "` failed");
  }
}

}  // namespace lstab
