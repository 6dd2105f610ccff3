#include "klx/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace klx::config {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

Value parse_scalar(const std::string& raw, int line_no) {
  const std::string s = trim(raw);
  if (s.empty()) throw std::invalid_argument("config: empty value at line " + std::to_string(line_no));
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      throw std::invalid_argument("config: unterminated string at line " + std::to_string(line_no));
    return s.substr(1, s.size() - 2);
  }
  if (s == "true") return true;
  if (s == "false") return false;
  const bool floaty = s.find_first_of(".eE") != std::string::npos &&
                      s.find("0x") == std::string::npos;
  try {
    size_t used = 0;
    if (!floaty) {
      const std::int64_t v = std::stoll(s, &used);
      if (used == s.size()) return v;
    }
    const double d = std::stod(s, &used);
    if (used == s.size()) return d;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: cannot parse value '" + s + "' at line " +
                              std::to_string(line_no));
}

Value parse_value(const std::string& raw, int line_no) {
  const std::string s = trim(raw);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']')
      throw std::invalid_argument("config: unterminated array at line " + std::to_string(line_no));
    std::vector<Value> items;
    std::string body = s.substr(1, s.size() - 2);
    std::string cur;
    bool in_string = false;
    for (char ch : body) {
      if (ch == '"') in_string = !in_string;
      if (ch == ',' && !in_string) {
        if (!trim(cur).empty()) items.push_back(parse_scalar(cur, line_no));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!trim(cur).empty()) items.push_back(parse_scalar(cur, line_no));
    if (items.empty()) return std::vector<double>{};
    if (std::holds_alternative<std::string>(items[0])) {
      std::vector<std::string> out;
      for (const auto& it : items) out.push_back(std::get<std::string>(it));
      return out;
    }
    std::vector<double> out;
    for (const auto& it : items) {
      if (std::holds_alternative<std::int64_t>(it))
        out.push_back(static_cast<double>(std::get<std::int64_t>(it)));
      else if (std::holds_alternative<double>(it))
        out.push_back(std::get<double>(it));
      else
        throw std::invalid_argument("config: mixed array at line " + std::to_string(line_no));
    }
    return out;
  }
  return parse_scalar(s, line_no);
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream is(text);
  std::string line, current;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw std::invalid_argument("config: bad section header at line " +
                                    std::to_string(line_no));
      current = trim(s.substr(1, s.size() - 2));
      cfg.sections[current];
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(line_no));
    const std::string key = trim(s.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("config: empty key at line " + std::to_string(line_no));
    cfg.sections[current][key] = parse_value(s.substr(eq + 1), line_no);
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_string(buf.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto it = sections.find(section);
  return it != sections.end() && it->second.count(key) > 0;
}

const Config::Section* Config::section(const std::string& name) const {
  const auto it = sections.find(name);
  return it == sections.end() ? nullptr : &it->second;
}

std::int64_t Config::get_int(const std::string& section, const std::string& key,
                             std::int64_t fallback) const {
  if (!has(section, key)) return fallback;
  const Value& v = sections.at(section).at(key);
  if (std::holds_alternative<std::int64_t>(v)) return std::get<std::int64_t>(v);
  if (std::holds_alternative<double>(v)) return static_cast<std::int64_t>(std::get<double>(v));
  throw std::invalid_argument("config: " + section + "." + key + " is not an integer");
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  if (!has(section, key)) return fallback;
  const Value& v = sections.at(section).at(key);
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  if (std::holds_alternative<std::int64_t>(v))
    return static_cast<double>(std::get<std::int64_t>(v));
  throw std::invalid_argument("config: " + section + "." + key + " is not a number");
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
  if (!has(section, key)) return fallback;
  const Value& v = sections.at(section).at(key);
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  throw std::invalid_argument("config: " + section + "." + key + " is not a boolean");
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  if (!has(section, key)) return fallback;
  const Value& v = sections.at(section).at(key);
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  throw std::invalid_argument("config: " + section + "." + key + " is not a string");
}

std::vector<double> Config::get_array(const std::string& section,
                                      const std::string& key) const {
  if (!has(section, key)) return {};
  const Value& v = sections.at(section).at(key);
  if (std::holds_alternative<std::vector<double>>(v))
    return std::get<std::vector<double>>(v);
  throw std::invalid_argument("config: " + section + "." + key + " is not a numeric array");
}

std::string Config::require_string(const std::string& section, const std::string& key) const {
  if (!has(section, key))
    throw std::invalid_argument("config: missing required key " + section + "." + key);
  return get_string(section, key, "");
}

}  // namespace klx::config
