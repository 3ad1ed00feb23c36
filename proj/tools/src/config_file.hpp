// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace eoslab::cli {

// Bad invocation: unknown flag, malformed value, inconsistent options. The
// CLI maps it to exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// key=value lines; blank lines and lines starting with '#' are skipped.
// Keys are long flag names without the leading dashes.
std::vector<ConfigEntry> read_config_file(const std::filesystem::path& path);

}  // namespace eoslab::cli
