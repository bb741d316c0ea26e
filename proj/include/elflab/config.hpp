#pragma once

#include <json.hpp>
#include <stdexcept>
#include <string>
#include <string_view>

namespace elflab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Declarative experiment description: a JSON document of nested tables,
// addressed with dotted paths ("mechanism.kind").
class Config {
 public:
  Config() = default;
  explicit Config(nlohmann::json doc) : doc_(std::move(doc)) {}

  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  // "a.b=value"; the value is read as JSON when it parses, else as a string.
  void set(const std::string& assignment);
  void set(std::string_view path, nlohmann::json value);

  const nlohmann::json& json() const { return doc_; }
  const nlohmann::json* find(std::string_view path) const;
  bool has(std::string_view path) const { return find(path) != nullptr; }

  template <typename T>
  T get(std::string_view path) const {
    const auto* node = find(path);
    if (!node) throw ConfigError("missing config key '" + std::string(path) + "'");
    try {
      return node->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config key '" + std::string(path) + "' has the wrong type");
    }
  }

  template <typename T>
  T get(std::string_view path, T fallback) const {
    return has(path) ? get<T>(path) : fallback;
  }

  // FNV-1a of the canonical (key-sorted, compact) dump.
  std::string hash() const;

 private:
  nlohmann::json doc_ = nlohmann::json::object();
};

}  // namespace elflab
