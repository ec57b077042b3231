#pragma once

#include <string_view>

#include <json.hpp>

namespace cyclebench {

/// Parses TOML into JSON. Integers stay integers, floats become doubles.
/// Dates and times are rejected since configs never use them.
nlohmann::json parse_toml(std::string_view text, std::string_view origin = "<config>");

}  // namespace cyclebench
