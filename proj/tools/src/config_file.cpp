// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "config_file.hpp"

#include <fstream>

#include <fmt/format.h>

namespace eoslab::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<ConfigEntry> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot open config file {}", path.string()));
  std::vector<ConfigEntry> entries;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(fmt::format("{}:{}: expected key=value", path.string(), lineno));
    std::string key = trim(line.substr(0, eq));
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    if (key.empty()) throw UsageError(fmt::format("{}:{}: empty key", path.string(), lineno));
    entries.push_back({key, trim(line.substr(eq + 1)), lineno});
  }
  return entries;
}

}  // namespace eoslab::cli
