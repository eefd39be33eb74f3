//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_CORE_CONFIG_HPP
#define CLIFFMASK_CORE_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "cliffmask/core/error.hpp"
#include "cliffmask/core/strings.hpp"

namespace cliffmask {

// Flat key=value configuration with '#' comments and blank lines.
// Unknown keys are rejected at validation time so typos fail loudly.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::kIoError, "cannot open config file: " + path);
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view s = trim(line);
      if (s.empty() || s[0] == '#') continue;
      auto eq = s.find('=');
      if (eq == std::string_view::npos) {
        raise(Errc::kConfigInvalid,
              path + ":" + std::to_string(lineno) + ": expected key=value");
      }
      std::string key{trim(s.substr(0, eq))};
      std::string val{trim(s.substr(eq + 1))};
      if (key.empty()) {
        raise(Errc::kConfigInvalid,
              path + ":" + std::to_string(lineno) + ": empty key");
      }
      cfg.values_[key] = val;
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_str(const std::string& key, const std::string& dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  std::string require_str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
      raise(Errc::kConfigInvalid, "missing required config key: " + key);
    }
    return it->second;
  }

  std::int64_t get_int(const std::string& key, std::int64_t dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    return parse_int(key, it->second);
  }

  double get_double(const std::string& key, double dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    return parse_double(key, it->second);
  }

  bool get_bool(const std::string& key, bool dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    raise(Errc::kConfigInvalid, "config key " + key + ": not a boolean: " + v);
  }

  // Every key present must be in `known`; anything else is a hard error.
  void validate_keys(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_) {
      if (!known.count(k)) {
        raise(Errc::kConfigInvalid, "unknown config key: " + k);
      }
    }
  }

  const std::map<std::string, std::string>& items() const { return values_; }

 private:
  static std::int64_t parse_int(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      std::int64_t out = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
      return out;
    } catch (const std::exception&) {
      raise(Errc::kConfigInvalid,
            "config key " + key + ": not an integer: " + v);
    }
  }

  static double parse_double(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      double out = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
      return out;
    } catch (const std::exception&) {
      raise(Errc::kConfigInvalid, "config key " + key + ": not a number: " + v);
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace cliffmask

#endif  // CLIFFMASK_CORE_CONFIG_HPP
