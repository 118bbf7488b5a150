#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace halfmoll::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The part of TOML the experiment configs use: [table] and [a.b] headers,
// bare or quoted keys, basic and literal strings, integers, floats (with
// inf/nan), booleans, and single-line arrays of those. Comments start at an
// unquoted '#'. Errors name the offending line.
nlohmann::json parse_toml(std::string_view text);
nlohmann::json parse_toml_file(const std::filesystem::path& path);

}  // namespace halfmoll::cli
