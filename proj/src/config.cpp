#include "wnlab/config.hpp"

namespace wnlab {

ConfigReader::ConfigReader(const nlohmann::json& j, std::string prefix)
    : j_(j), prefix_(std::move(prefix)) {
  if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected a JSON object");
}

const nlohmann::json& ConfigReader::child(const std::string& key) {
  used_.insert(key);
  if (!j_.contains(key)) throw ConfigError(path(key), "missing");
  return j_.at(key);
}

void ConfigReader::finish() const {
  for (const auto& [key, value] : j_.items())
    if (!used_.count(key)) throw ConfigError(path(key), "unknown key");
}

}  // namespace wnlab
