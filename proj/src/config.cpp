#include "rflab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rflab/error.hpp"
#include "rflab/io.hpp"

namespace rflab {

ConfigFile ConfigFile::parse(std::string_view text) {
  ConfigFile cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = std::string(io::trim(line));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected `key = value`");
    }
    const std::string key(io::trim(std::string_view(line).substr(0, eq)));
    const std::string value(io::trim(std::string_view(line).substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!cfg.values_.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key `" + key + "`");
    }
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file `" + path + "`");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool ConfigFile::has(const std::string& key) const { return values_.count(key) != 0; }

void ConfigFile::set(const std::string& key, const std::string& value) { values_[key] = value; }

const std::string* ConfigFile::find(const std::string& key) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
  const auto* v = find(key);
  return v ? *v : fallback;
}

double ConfigFile::get_real(const std::string& key, double fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  try {
    return io::parse_real(*v);
  } catch (const ConfigError&) {
    throw ConfigError("key `" + key + "`: not a number: " + *v);
  }
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) throw ConfigError("key `" + key + "`: not an integer: " + *v);
  return out;
}

std::uint64_t ConfigFile::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError("key `" + key + "`: not a non-negative integer: " + *v);
  }
  return out;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("key `" + key + "`: not a boolean: " + *v);
}

std::vector<double> ConfigFile::get_list(const std::string& key, const std::vector<double>& fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : io::split(*v, ',')) {
    const std::string t(io::trim(item));
    if (t.empty()) continue;
    try {
      out.push_back(io::parse_real(t));
    } catch (const ConfigError&) {
      throw ConfigError("key `" + key + "`: not a number: " + t);
    }
  }
  return out;
}

void ConfigFile::reject_unknown() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (used_.count(key)) continue;
    unknown += unknown.empty() ? key : ", " + key;
  }
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

}  // namespace rflab
