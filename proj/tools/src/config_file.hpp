#pragma once

#include <map>
#include <string>
#include <vector>

namespace torusperc::cli {

// Parsed INI-style config: [section] headers, key = value lines, # and ;
// comments. Duplicate keys within a section are an error, as are keys outside
// any section.
struct ConfigFile {
  // section -> key -> value, insertion order kept separately for the echo
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::vector<std::pair<std::string, std::string>> order;  // (section, key)

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
};

ConfigFile parse_config_file(const std::string& path);
ConfigFile parse_config_text(const std::string& text, const std::string& origin);

double parse_double(const std::string& value, const std::string& what);
long long parse_int(const std::string& value, const std::string& what);
bool parse_bool(const std::string& value, const std::string& what);
std::vector<double> parse_double_list(const std::string& value, const std::string& what);
std::vector<long long> parse_int_list(const std::string& value, const std::string& what);

}  // namespace torusperc::cli
