#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "innout/error.hpp"

namespace innout {

// Flat dotted-key configuration, e.g.
//   curation.basic.min_duration_s = 4
//   curation.scores.clipiqa.tail = low
// Lines starting with '#' are comments.
class Config {
 public:
  Config() = default;

  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    Config cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        if (line.find_first_not_of(" \t\r") != std::string::npos)
          throw ValidationError("config " + path.string() + ":" +
                                std::to_string(lineno) + ": expected key = value");
        continue;
      }
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) {
    if (key.empty()) throw ValidationError("config: empty key");
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key, double dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw ValidationError("config key " + key + ": not a number: " + it->second);
    }
  }

  std::int64_t get_int(const std::string& key, std::int64_t dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
      return std::stoll(it->second);
    } catch (const std::exception&) {
      throw ValidationError("config key " + key + ": not an integer: " + it->second);
    }
  }

  bool get_bool(const std::string& key, bool dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ValidationError("config key " + key + ": not a bool: " + it->second);
  }

  // Keys under "prefix." in sorted order.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    const std::string p = prefix + ".";
    for (const auto& [k, v] : values_)
      if (k.rfind(p, 0) == 0) out.push_back(k);
    return out;
  }

  // Resolved snapshot for provenance; sorted, parseable by load().
  void dump(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write config snapshot: " + path.string());
    for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
  }

 private:
  static std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace innout
