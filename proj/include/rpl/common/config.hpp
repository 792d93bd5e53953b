#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace rpl {

// One `[section]` of a key = value config file. Getters record which keys
// were read so that leftovers can be reported as unknown.
class ConfigSection {
 public:
  ConfigSection() = default;
  explicit ConfigSection(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<long long> get_ints(const std::string& key, const std::vector<long long>& fallback) const;

  // Throws ConfigError naming the first key no getter asked for.
  void reject_unknown() const;

 private:
  const std::string* lookup(const std::string& key) const;

  std::string name_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  // Sections outside `allowed` are errors.
  void require_sections(const std::set<std::string>& allowed) const;
  bool has(const std::string& section) const { return sections_.count(section) != 0; }
  // Missing sections read as empty.
  ConfigSection& section(const std::string& name);
  const std::map<std::string, ConfigSection>& sections() const { return sections_; }

 private:
  std::map<std::string, ConfigSection> sections_;
};

}  // namespace rpl
