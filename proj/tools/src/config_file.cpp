#include "config_file.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "torusperc/errors.hpp"

namespace torusperc::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  return it != sections.end() && it->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  if (it == sections.end() || !it->second.count(key)) {
    throw Error("config-invalid", "missing [" + section + "] " + key);
  }
  return it->second.at(key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

ConfigFile parse_config_text(const std::string& text, const std::string& origin) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) {
        throw Error("config-invalid", where + ": malformed section header");
      }
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw Error("config-invalid", where + ": empty section name");
      cfg.sections[section];
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw Error("config-invalid", where + ": expected key = value");
    }
    if (section.empty()) {
      throw Error("config-invalid", where + ": key outside any [section]");
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw Error("config-invalid", where + ": empty key");
    if (cfg.sections[section].count(key)) {
      throw Error("config-invalid", where + ": duplicate key " + key);
    }
    cfg.sections[section][key] = value;
    cfg.order.emplace_back(section, key);
  }
  return cfg;
}

ConfigFile parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io-failure", "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

double parse_double(const std::string& value, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    throw Error("config-invalid", what + ": not a number: " + value);
  }
  return v;
}

long long parse_int(const std::string& value, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    throw Error("config-invalid", what + ": not an integer: " + value);
  }
  return v;
}

bool parse_bool(const std::string& value, const std::string& what) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw Error("config-invalid", what + ": not a boolean: " + value);
}

std::vector<double> parse_double_list(const std::string& value, const std::string& what) {
  std::vector<double> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) throw Error("config-invalid", what + ": empty list entry");
    out.push_back(parse_double(t, what));
  }
  if (out.empty()) throw Error("config-invalid", what + ": empty list");
  return out;
}

std::vector<long long> parse_int_list(const std::string& value, const std::string& what) {
  std::vector<long long> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) throw Error("config-invalid", what + ": empty list entry");
    out.push_back(parse_int(t, what));
  }
  if (out.empty()) throw Error("config-invalid", what + ": empty list");
  return out;
}

}  // namespace torusperc::cli
