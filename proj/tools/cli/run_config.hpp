// SPDX-License-Identifier: Apache-2.0
//
// Flat "section.key = value" configuration shared by the config file and the
// command-line flags. Flags are applied after the file and override it.
#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cophase::cli {

/// Bad key or value; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required key is missing; reported with usage text and exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RunConfig {
 public:
  /// Reads `key = value` lines. `[section]` headers prefix the keys that
  /// follow; `#` starts a comment.
  static RunConfig parse(std::istream& in, const std::string& source = "config");
  static RunConfig load(const std::string& path);

  static bool known_key(const std::string& key);
  static const std::vector<std::string>& known_keys();

  void set(const std::string& key, const std::string& value);
  /// Overwrites every key present in `other`.
  void merge(const RunConfig& other);

  bool has(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  std::string get_string(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::uint64_t get_seed(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  /// Comma-separated doubles.
  std::vector<double> get_doubles(const std::string& key) const;
  /// Comma-separated words.
  std::vector<std::string> get_list(const std::string& key) const;

  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  double get_double_or(const std::string& key, double fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;

  /// Throws UsageError listing every missing key.
  void require(const std::vector<std::string>& keys) const;

 private:
  std::map<std::string, std::string> values_;
};

/// "a:step:b" (inclusive) or a comma list.
std::vector<double> parse_ratio_range(const std::string& text);

}  // namespace cophase::cli
