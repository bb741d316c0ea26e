#include "elflab/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace elflab {

Config Config::parse(const std::string& text) {
  try {
    auto doc = nlohmann::json::parse(text, nullptr, true, true);
    if (!doc.is_object()) throw ConfigError("config must be a table at the top level");
    return Config(std::move(doc));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config does not parse: ") + e.what());
  }
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const nlohmann::json* Config::find(std::string_view path) const {
  const nlohmann::json* node = &doc_;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto dot = path.find('.', start);
    const auto key = std::string(path.substr(start, dot == std::string_view::npos ? path.npos : dot - start));
    if (!node->is_object()) return nullptr;
    const auto it = node->find(key);
    if (it == node->end()) return nullptr;
    node = &*it;
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return node;
}

void Config::set(std::string_view path, nlohmann::json value) {
  nlohmann::json* node = &doc_;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const auto key = std::string(path.substr(start, dot == std::string_view::npos ? path.npos : dot - start));
    if (key.empty()) throw ConfigError("empty key in '" + std::string(path) + "'");
    if (!node->is_object()) *node = nlohmann::json::object();
    if (dot == std::string_view::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

void Config::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  set(std::string_view(assignment).substr(0, eq), std::move(value));
}

std::string Config::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : doc_.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace elflab
