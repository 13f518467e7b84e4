#pragma once

// Flat key-value run configuration: `key = value` lines, '#' comments.
// Unknown keys are rejected by name.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ltot::harness {

class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string str(const std::string& key, const std::string& fallback) const;
  double num(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::vector<std::int64_t> int_list(const std::string& key,
                                     std::vector<std::int64_t> fallback) const;

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Keys accepted by parse(); anything else raises an error naming the key.
const std::vector<std::string>& known_config_keys();

}  // namespace ltot::harness
