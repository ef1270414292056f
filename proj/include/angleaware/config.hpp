// Flat key/value scenario configs:
//
//   # comment
//   [section]
//   key = value
//
// Repeated keys are allowed where documented (drone state lines). Unknown
// keys are rejected so typos fail loudly instead of silently using defaults.
#pragma once

#include "angleaware/simulator.hpp"

#include <string>
#include <vector>

namespace angleaware {

class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text);  // throws on syntax errors
  static ConfigFile load(const std::string& path);   // throws on IO errors too

  bool has(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  long long get_int(const std::string& section, const std::string& key,
                    long long fallback) const;
  unsigned long long get_uint(const std::string& section,
                              const std::string& key,
                              unsigned long long fallback) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  // every value bound to the key, in file order
  std::vector<std::string> get_all(const std::string& section,
                                   const std::string& key) const;
  // keys never read by any getter; empty after a full extraction
  std::vector<std::string> unused_keys() const;

 private:
  struct Entry {
    std::string section, key, value;
    mutable bool used = false;
  };
  std::vector<Entry> entries_;
};

// Parses a scenario config. Does not run resolve_scenario; callers may first
// override the seed, then resolve. Throws std::invalid_argument naming the
// offending key on type errors or unknown keys.
ScenarioConfig scenario_from_text(const std::string& text);
ScenarioConfig scenario_from_file(const std::string& path);

// Serializes a resolved config; parsing the output reproduces the config
// exactly (doubles are printed with round-trip precision).
std::string scenario_to_text(const ScenarioConfig& cfg);

}  // namespace angleaware
