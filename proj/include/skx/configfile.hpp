// key = value config files. Consumers pull typed values; any key left
// unclaimed is an error, so stale or misspelled settings cannot silently
// do nothing.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skx/tensor.hpp"

namespace skx {

class ConfigMap {
 public:
  ConfigMap() = default;
  static ConfigMap parse(const std::string& text, const std::string& origin);
  static ConfigMap load(const std::string& path);

  // Each getter consumes the key. Missing keys return the fallback.
  std::string get_string(const std::string& key, const std::string& fallback);
  long get_long(const std::string& key, long fallback);
  double get_double(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);
  // Comma-separated integer list, e.g. `decay_epochs = 35,55`.
  std::vector<long> get_long_list(const std::string& key, std::vector<long> fallback);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  // Throws if any key was never consumed, naming each offender.
  void reject_unknown() const;

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> consumed_;
};

}  // namespace skx
