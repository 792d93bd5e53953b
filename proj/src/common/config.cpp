#include "rpl/common/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rpl/common/error.hpp"

namespace rpl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& where, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || errno == ERANGE) throw ConfigError(where + ": expected a number, got '" + text + "'");
  return v;
}

long long parse_int(const std::string& where, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || *end != '\0' || errno == ERANGE) throw ConfigError(where + ": expected an integer, got '" + text + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

const std::string* ConfigSection::lookup(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

std::string ConfigSection::get_string(const std::string& key, const std::string& fallback) const {
  const std::string* v = lookup(key);
  return v ? *v : fallback;
}

double ConfigSection::get_double(const std::string& key, double fallback) const {
  const std::string* v = lookup(key);
  return v ? parse_double("[" + name_ + "] " + key, *v) : fallback;
}

long long ConfigSection::get_int(const std::string& key, long long fallback) const {
  const std::string* v = lookup(key);
  return v ? parse_int("[" + name_ + "] " + key, *v) : fallback;
}

bool ConfigSection::get_bool(const std::string& key, bool fallback) const {
  const std::string* v = lookup(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("[" + name_ + "] " + key + ": expected a boolean, got '" + *v + "'");
}

std::vector<double> ConfigSection::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const std::string* v = lookup(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const std::string& item : split_list(*v)) out.push_back(parse_double("[" + name_ + "] " + key, item));
  return out;
}

std::vector<long long> ConfigSection::get_ints(const std::string& key,
                                               const std::vector<long long>& fallback) const {
  const std::string* v = lookup(key);
  if (!v) return fallback;
  std::vector<long long> out;
  for (const std::string& item : split_list(*v)) out.push_back(parse_int("[" + name_ + "] " + key, item));
  return out;
}

void ConfigSection::reject_unknown() const {
  for (const auto& [key, value] : values_) {
    if (!used_.count(key)) throw ConfigError("[" + name_ + "] unknown key '" + key + "'");
  }
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  std::string current;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
      cfg.section(current);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (current.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    ConfigSection& sec = cfg.section(current);
    if (sec.has(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    sec.set(key, trim(line.substr(eq + 1)));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void Config::require_sections(const std::set<std::string>& allowed) const {
  for (const auto& [name, sec] : sections_) {
    if (!allowed.count(name)) throw ConfigError("unknown section [" + name + "]");
  }
}

ConfigSection& Config::section(const std::string& name) {
  auto it = sections_.find(name);
  if (it == sections_.end()) it = sections_.emplace(name, ConfigSection(name)).first;
  return it->second;
}

}  // namespace rpl
