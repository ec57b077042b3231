#include "cyclebench/toml_json.hpp"

#include <string>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "cyclebench/error.hpp"

namespace cyclebench {

namespace {

nlohmann::json to_json(const toml::node& node, std::string_view origin) {
  if (const auto* t = node.as_table()) {
    auto out = nlohmann::json::object();
    for (const auto& [key, value] : *t) out[std::string(key.str())] = to_json(value, origin);
    return out;
  }
  if (const auto* a = node.as_array()) {
    auto out = nlohmann::json::array();
    for (const auto& value : *a) out.push_back(to_json(value, origin));
    return out;
  }
  if (const auto* s = node.as_string()) return s->get();
  if (const auto* i = node.as_integer()) return i->get();
  if (const auto* f = node.as_floating_point()) return f->get();
  if (const auto* b = node.as_boolean()) return b->get();
  const auto where = node.source().begin;
  throw Error(ErrorKind::format, std::string(origin) + ":" + std::to_string(where.line) +
                                     ": dates and times are not supported");
}

}  // namespace

nlohmann::json parse_toml(std::string_view text, std::string_view origin) {
  try {
    const toml::table root = toml::parse(text, origin);
    return to_json(root, origin);
  } catch (const toml::parse_error& e) {
    const auto where = e.source().begin;
    throw Error(ErrorKind::format, std::string(origin) + ":" + std::to_string(where.line) + ": " +
                                       std::string(e.description()));
  }
}

}  // namespace cyclebench
