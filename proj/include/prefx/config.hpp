#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace prefx {

// User-facing configuration problem: maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Plain-text key=value configuration ('#' starts a comment). Later
// assignments and overrides win.
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text);

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  // "KEY=VALUE" form used by the CLI --set flag.
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_str(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  std::int64_t get_int(const std::string& key, std::int64_t def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  bool get_bool(const std::string& key, bool def) const;

  // Throw ConfigError naming the key when absent.
  std::string require_str(const std::string& key) const;
  double require_double(const std::string& key) const;
  std::int64_t require_int(const std::string& key) const;

  // "auto" or absence -> nullopt.
  std::optional<double> get_auto_double(const std::string& key) const;
  std::optional<std::int64_t> get_auto_int(const std::string& key) const;

  // Comma-separated lists.
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& def) const;
  std::vector<std::string> get_str_list(const std::string& key,
                                        const std::vector<std::string>& def) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace prefx
