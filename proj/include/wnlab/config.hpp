/// @file config.hpp
/// @brief Strict reader over a JSON config object.
#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "wnlab/error.hpp"

namespace wnlab {

/// Reads keys of one JSON object, remembering which were consumed;
/// finish() rejects anything left over. Errors name the full key path.
class ConfigReader {
 public:
  ConfigReader(const nlohmann::json& j, std::string prefix = "");

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!j_.contains(key)) return fallback;
    return require<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(path(key), "missing");
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(path(key), "wrong type");
    }
  }

  /// Raw sub-object (marked consumed).
  const nlohmann::json& child(const std::string& key);

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  void finish() const;

 private:
  const nlohmann::json& j_;
  std::string prefix_;
  std::set<std::string> used_;
};

}  // namespace wnlab
