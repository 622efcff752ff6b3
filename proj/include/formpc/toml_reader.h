#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace formpc::toml {

/// Parsed TOML value. Supports the subset used by scenario files: tables,
/// arrays of tables, dotted keys, strings, integers, floats (including
/// inf/nan), booleans, arrays and inline tables. Dates are not supported.
struct Value {
  enum class Kind { boolean, integer, floating, string, array, table };

  Kind kind = Kind::table;
  bool boolean = false;
  std::int64_t integer = 0;
  double floating = 0.0;
  std::string string;
  std::vector<Value> array;
  std::vector<std::pair<std::string, Value>> table;
  bool is_table_array = false;  // array created by [[header]]
  int line = 0;

  bool is_number() const { return kind == Kind::integer || kind == Kind::floating; }
  double as_number() const {
    return kind == Kind::integer ? static_cast<double>(integer) : floating;
  }
  const Value* find(std::string_view key) const;
  Value* find(std::string_view key);
};

std::string_view kind_name(Value::Kind kind);

/// Throws ConfigError (key "toml") with the line number on malformed input.
Value parse(std::string_view text);
Value parse_file(const std::filesystem::path& path);

}  // namespace formpc::toml
