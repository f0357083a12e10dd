#include "skx/configfile.hpp"

#include <sstream>

#include "skx/io.hpp"

namespace skx {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigMap ConfigMap::parse(const std::string& text, const std::string& origin) {
  ConfigMap cm;
  cm.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      fail(origin + ":" + std::to_string(line_no) + ": expected `key = value`, got '" + t + "'");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) fail(origin + ":" + std::to_string(line_no) + ": empty key");
    if (cm.values_.count(key)) {
      fail(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    cm.values_[key] = value;
    cm.consumed_[key] = false;
  }
  return cm;
}

ConfigMap ConfigMap::load(const std::string& path) {
  return parse(read_text_file(path), path);
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  return it->second;
}

long ConfigMap::get_long(const std::string& key, long fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  try {
    size_t pos = 0;
    long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    fail(origin_ + ": key '" + key + "' needs an integer, got '" + it->second + "'");
  }
}

double ConfigMap::get_double(const std::string& key, double fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    fail(origin_ + ": key '" + key + "' needs a number, got '" + it->second + "'");
  }
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  fail(origin_ + ": key '" + key + "' needs true/false, got '" + it->second + "'");
}

std::vector<long> ConfigMap::get_long_list(const std::string& key, std::vector<long> fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  std::vector<long> out;
  if (trim(it->second).empty()) return out;
  std::istringstream ss(it->second);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    try {
      size_t pos = 0;
      out.push_back(std::stol(part, &pos));
      if (pos != part.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      fail(origin_ + ": key '" + key + "' needs comma-separated integers, got '" + it->second + "'");
    }
  }
  return out;
}

void ConfigMap::reject_unknown() const {
  std::string unknown;
  for (const auto& [key, used] : consumed_) {
    if (!used) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) fail(origin_ + ": unknown keys: " + unknown);
}

}  // namespace skx
