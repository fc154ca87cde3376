#pragma once

// Flat `key = value` configuration files.  '#' starts a comment; blank lines
// are ignored; list values are comma separated.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rflab {

class ConfigFile {
 public:
  /// Throws ConfigError on malformed lines or repeated keys.
  static ConfigFile parse(std::string_view text);
  static ConfigFile load(const std::string& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_real(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  /// Throws ConfigError naming every key that no getter has asked for.
  void reject_unknown() const;

  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

 private:
  const std::string* find(const std::string& key) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace rflab
