#include "prefx/config.hpp"

#include <fstream>
#include <sstream>

namespace prefx {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " is not key=value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    cfg.kv_[key] = value;
  }
  return cfg;
}

void KeyValueConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override is not KEY=VALUE: " + assignment);
  kv_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::string KeyValueConfig::get_str(const std::string& key, const std::string& def) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not a number: " + it->second);
  }
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not an integer: " + it->second);
  }
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not an unsigned integer: " + it->second);
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config key " + key + " is not a boolean: " + v);
}

std::string KeyValueConfig::require_str(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing config key: " + key);
  return it->second;
}

double KeyValueConfig::require_double(const std::string& key) const {
  if (!has(key)) throw ConfigError("missing config key: " + key);
  return get_double(key, 0.0);
}

std::int64_t KeyValueConfig::require_int(const std::string& key) const {
  if (!has(key)) throw ConfigError("missing config key: " + key);
  return get_int(key, 0);
}

std::optional<double> KeyValueConfig::get_auto_double(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end() || it->second == "auto") return std::nullopt;
  return get_double(key, 0.0);
}

std::optional<std::int64_t> KeyValueConfig::get_auto_int(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end() || it->second == "auto") return std::nullopt;
  return get_int(key, 0);
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key,
                                                    const std::vector<double>& def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<double> out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + " has a non-numeric item: " + item);
    }
  }
  if (out.empty()) throw ConfigError("config key " + key + " is an empty list");
  return out;
}

std::vector<std::string> KeyValueConfig::get_str_list(
    const std::string& key, const std::vector<std::string>& def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<std::string> out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw ConfigError("config key " + key + " is an empty list");
  return out;
}

}  // namespace prefx
