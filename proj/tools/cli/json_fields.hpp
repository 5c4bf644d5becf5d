#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "pgptycho/errors.hpp"
#include "pgptycho/field.hpp"

namespace pgptycho::cli {

// Overwrites `out` with j[key] when present; ConfigError on a type mismatch.
template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

inline void read_shape(const nlohmann::json& j, const char* key, Shape& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_array() || it->size() != 2) {
    throw ConfigError(std::string("config field '") + key + "' must be [height, width]");
  }
  out = Shape{(*it)[0].get<std::size_t>(), (*it)[1].get<std::size_t>()};
}

}  // namespace pgptycho::cli
