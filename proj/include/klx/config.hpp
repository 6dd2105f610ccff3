#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace klx::config {

using Value = std::variant<std::int64_t, double, bool, std::string,
                           std::vector<double>, std::vector<std::string>>;

/// Parsed TOML-subset document: comments, [section] headers, key = value
/// with strings, integers, floats, booleans and homogeneous arrays. Keys
/// before the first section header live in the "" section.
class Config {
 public:
  using Section = std::map<std::string, Value>;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  const Section* section(const std::string& name) const;

  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  std::vector<double> get_array(const std::string& section, const std::string& key) const;

  std::string require_string(const std::string& section, const std::string& key) const;

  std::map<std::string, Section> sections;
};

}  // namespace klx::config
