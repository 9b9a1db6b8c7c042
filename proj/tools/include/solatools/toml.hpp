#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"

namespace solatools {

// configuration problems are user errors: reported with location, exit code 2
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Minimal TOML-style reader covering what experiment configs need:
// [table] and [[array-of-tables]] headers, bare keys, strings, booleans,
// integers, floats, flat arrays, and # comments. Produces a json document.
nlohmann::json parse_toml(const std::string& text, const std::string& origin);

// Reads a config file; JSON documents (first significant byte '{') pass
// through the JSON parser, anything else is treated as TOML-style.
nlohmann::json load_config_file(const std::string& path);

}  // namespace solatools
