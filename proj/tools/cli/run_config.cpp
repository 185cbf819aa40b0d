// SPDX-License-Identifier: Apache-2.0
#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cophase::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(trim(item));
  return parts;
}

ConfigError bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  return ConfigError("invalid value for key '" + key + "': '" + value + "' (expected " + expected + ")");
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw bad_value(key, text, "a finite number");
    return v;
  } catch (const std::logic_error&) {
    throw bad_value(key, text, "a finite number");
  }
}

}  // namespace

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys{
      "grid.N",           "grid.M",           "grid.C",
      "grid.ratios",      "grid.reference_N", "noise.n",
      "noise.levels",     "run.trials",       "run.seed",
      "run.threads",      "run.record_time",  "run.reference_trials",
      "solver.list",      "solver.kind",      "solver.pin",
      "solver.max_iterations",                "input.operator",
      "input.observations",                   "input.solution",
      "output.path",      "output.trials",    "output.operator",
      "antenna.ratio",    "antenna.source_diameter",
      "antenna.measurement_diameter",         "antenna.spacing",
      "bound.observations",
  };
  return keys;
}

bool RunConfig::known_key(const std::string& key) {
  const auto& keys = known_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

RunConfig RunConfig::parse(std::istream& in, const std::string& source) {
  RunConfig config;
  std::string line;
  std::string section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(number);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    if (!known_key(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    config.values_[key] = trim(line.substr(eq + 1));
  }
  return config;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known_key(key)) throw ConfigError("unknown key '" + key + "'");
  values_[key] = value;
}

void RunConfig::merge(const RunConfig& other) {
  for (const auto& [key, value] : other.values_) values_[key] = value;
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string RunConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("missing required key '" + key + "'");
  return it->second;
}

long long RunConfig::get_int(const std::string& key) const {
  const std::string text = get_string(key);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw bad_value(key, text, "an integer");
  return v;
}

std::uint64_t RunConfig::get_seed(const std::string& key) const {
  const std::string text = get_string(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw bad_value(key, text, "an unsigned 64-bit integer");
  return v;
}

double RunConfig::get_double(const std::string& key) const { return to_double(key, get_string(key)); }

bool RunConfig::get_bool(const std::string& key) const {
  const std::string text = get_string(key);
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw bad_value(key, text, "a boolean");
}

std::vector<double> RunConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& part : split(get_string(key), ',')) out.push_back(to_double(key, part));
  if (out.empty()) throw bad_value(key, "", "a comma-separated list of numbers");
  return out;
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  for (auto& part : split(get_string(key), ',')) {
    if (!part.empty()) out.push_back(std::move(part));
  }
  if (out.empty()) throw bad_value(key, get_string(key), "a comma-separated list");
  return out;
}

std::string RunConfig::get_string_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

long long RunConfig::get_int_or(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double RunConfig::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool RunConfig::get_bool_or(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}

void RunConfig::require(const std::vector<std::string>& keys) const {
  std::string missing;
  for (const auto& key : keys) {
    if (has(key)) continue;
    missing += missing.empty() ? "'" + key + "'" : ", '" + key + "'";
  }
  if (!missing.empty()) throw UsageError("missing required key(s) " + missing);
}

std::vector<double> parse_ratio_range(const std::string& text) {
  const std::string key = "grid.ratios";
  if (text.find(':') == std::string::npos) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) out.push_back(to_double(key, part));
    if (out.empty()) throw bad_value(key, text, "a:step:b or a comma list");
    return out;
  }
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw bad_value(key, text, "a:step:b");
  const double first = to_double(key, parts[0]);
  const double step = to_double(key, parts[1]);
  const double last = to_double(key, parts[2]);
  if (!(step > 0.0) || last < first) throw bad_value(key, text, "a:step:b with step > 0 and b >= a");
  const auto count = static_cast<long long>(std::floor((last - first) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) out.push_back(first + static_cast<double>(i) * step);
  return out;
}

}  // namespace cophase::cli
