#include "formpc/toml_reader.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

#include "formpc/errors.h"

namespace formpc::toml {

const Value* Value::find(std::string_view key) const {
  for (const auto& [k, v] : table) {
    if (k == key) return &v;
  }
  return nullptr;
}

Value* Value::find(std::string_view key) {
  for (auto& [k, v] : table) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string_view kind_name(Value::Kind kind) {
  switch (kind) {
    case Value::Kind::boolean: return "boolean";
    case Value::Kind::integer: return "integer";
    case Value::Kind::floating: return "float";
    case Value::Kind::string: return "string";
    case Value::Kind::array: return "array";
    case Value::Kind::table: return "table";
  }
  return "unknown";
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Value parse_document() {
    Value root;
    root.line = 1;
    Value* current = &root;
    while (true) {
      skip_blank_lines();
      if (at_end()) break;
      if (peek() == '[') {
        current = parse_header(root);
      } else {
        parse_key_value(*current);
      }
      expect_line_end();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("toml", "line " + std::to_string(line_) + ": " + msg);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  char get() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  void skip_spaces() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') ++pos_;
    }
  }
  void skip_blank_lines() {
    while (true) {
      skip_spaces();
      skip_comment();
      if (at_end()) return;
      if (peek() == '\r' && peek(1) == '\n') ++pos_;
      if (peek() == '\n') {
        get();
        continue;
      }
      return;
    }
  }
  // Whitespace, comments and newlines inside arrays.
  void skip_array_space() {
    while (true) {
      skip_spaces();
      skip_comment();
      if (!at_end() && (peek() == '\n' || peek() == '\r')) {
        get();
        continue;
      }
      return;
    }
  }
  void expect_line_end() {
    skip_spaces();
    skip_comment();
    if (at_end()) return;
    if (peek() == '\r') ++pos_;
    if (at_end() || peek() != '\n') fail("expected end of line");
    get();
  }

  std::string parse_key_part() {
    skip_spaces();
    if (peek() == '"') return parse_basic_string();
    if (peek() == '\'') return parse_literal_string();
    std::string key;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                         peek() == '_' || peek() == '-')) {
      key.push_back(get());
    }
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::vector<std::string> parse_dotted_key() {
    std::vector<std::string> parts{parse_key_part()};
    skip_spaces();
    while (peek() == '.') {
      ++pos_;
      parts.push_back(parse_key_part());
      skip_spaces();
    }
    return parts;
  }

  static Value make_table(int line) {
    Value v;
    v.kind = Value::Kind::table;
    v.line = line;
    return v;
  }

  // Descends into (creating) nested tables; [[arrays]] resolve to their last
  // element as in TOML.
  Value* descend(Value& from, const std::string& key) {
    Value* child = from.find(key);
    if (!child) {
      from.table.emplace_back(key, make_table(line_));
      return &from.table.back().second;
    }
    if (child->kind == Value::Kind::table) return child;
    if (child->kind == Value::Kind::array && child->is_table_array &&
        !child->array.empty()) {
      return &child->array.back();
    }
    fail("key '" + key + "' is not a table");
  }

  Value* parse_header(Value& root) {
    ++pos_;
    const bool array_of_tables = peek() == '[';
    if (array_of_tables) ++pos_;
    const auto parts = parse_dotted_key();
    if (get() != ']') fail("expected ']'");
    if (array_of_tables && (at_end() || get() != ']')) fail("expected ']]'");

    Value* cur = &root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) cur = descend(*cur, parts[i]);
    const std::string& last = parts.back();
    Value* existing = cur->find(last);
    if (array_of_tables) {
      if (!existing) {
        Value arr;
        arr.kind = Value::Kind::array;
        arr.is_table_array = true;
        arr.line = line_;
        cur->table.emplace_back(last, std::move(arr));
        existing = &cur->table.back().second;
      } else if (!(existing->kind == Value::Kind::array && existing->is_table_array)) {
        fail("'" + last + "' redefined as array of tables");
      }
      existing->array.push_back(make_table(line_));
      return &existing->array.back();
    }
    if (existing) {
      if (existing->kind != Value::Kind::table) fail("'" + last + "' is not a table");
      if (!mark_defined(parts)) fail("table '" + last + "' defined twice");
      return existing;
    }
    mark_defined(parts);
    cur->table.emplace_back(last, make_table(line_));
    return &cur->table.back().second;
  }

  bool mark_defined(const std::vector<std::string>& parts) {
    std::string path;
    for (const auto& p : parts) path += p + '\x1f';
    for (const auto& d : defined_tables_) {
      if (d == path) return false;
    }
    defined_tables_.push_back(std::move(path));
    return true;
  }

  void parse_key_value(Value& into) {
    const int line = line_;
    const auto parts = parse_dotted_key();
    skip_spaces();
    if (at_end() || get() != '=') fail("expected '=' after key");
    skip_spaces();
    Value value = parse_value();
    value.line = line;
    Value* cur = &into;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) cur = descend(*cur, parts[i]);
    if (cur->find(parts.back())) fail("duplicate key '" + parts.back() + "'");
    cur->table.emplace_back(parts.back(), std::move(value));
  }

  Value parse_value() {
    Value v;
    v.line = line_;
    const char c = peek();
    if (c == '"') {
      v.kind = Value::Kind::string;
      v.string = parse_basic_string();
    } else if (c == '\'') {
      v.kind = Value::Kind::string;
      v.string = parse_literal_string();
    } else if (c == '[') {
      v = parse_array();
    } else if (c == '{') {
      v = parse_inline_table();
    } else if (text_.substr(pos_, 4) == "true" && !is_bare(peek(4))) {
      pos_ += 4;
      v.kind = Value::Kind::boolean;
      v.boolean = true;
    } else if (text_.substr(pos_, 5) == "false" && !is_bare(peek(5))) {
      pos_ += 5;
      v.kind = Value::Kind::boolean;
      v.boolean = false;
    } else {
      v = parse_number();
    }
    return v;
  }

  static bool is_bare(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_basic_string() {
    ++pos_;
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '"') break;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (at_end()) fail("unterminated escape");
      const char e = get();
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case 'u': append_utf8(out, parse_hex(4)); break;
        case 'U': append_utf8(out, parse_hex(8)); break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
    return out;
  }

  std::uint32_t parse_hex(int digits) {
    std::uint32_t code = 0;
    for (int i = 0; i < digits; ++i) {
      if (at_end()) fail("truncated unicode escape");
      const char c = get();
      code <<= 4;
      if (c >= '0' && c <= '9') {
        code |= static_cast<std::uint32_t>(c - '0');
      } else if (c >= 'a' && c <= 'f') {
        code |= static_cast<std::uint32_t>(c - 'a' + 10);
      } else if (c >= 'A' && c <= 'F') {
        code |= static_cast<std::uint32_t>(c - 'A' + 10);
      } else {
        fail("invalid unicode escape");
      }
    }
    if (code > 0x10FFFF || (code >= 0xD800 && code <= 0xDFFF)) fail("invalid unicode scalar");
    return code;
  }

  static void append_utf8(std::string& out, std::uint32_t code) {
    if (code < 0x80) {
      out.push_back(static_cast<char>(code));
    } else if (code < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (code >> 6)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    } else if (code < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (code >> 12)));
      out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (code >> 18)));
      out.push_back(static_cast<char>(0x80 | ((code >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    }
  }

  std::string parse_literal_string() {
    ++pos_;
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '\'') break;
      out.push_back(c);
    }
    return out;
  }

  Value parse_array() {
    Value v;
    v.kind = Value::Kind::array;
    v.line = line_;
    ++pos_;
    while (true) {
      skip_array_space();
      if (peek() == ']') {
        ++pos_;
        return v;
      }
      v.array.push_back(parse_value());
      skip_array_space();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        return v;
      }
      fail("expected ',' or ']' in array");
    }
  }

  Value parse_inline_table() {
    Value v = make_table(line_);
    ++pos_;
    skip_spaces();
    if (peek() == '}') {
      ++pos_;
      return v;
    }
    while (true) {
      parse_key_value(v);
      skip_spaces();
      if (peek() == ',') {
        ++pos_;
        skip_spaces();
        continue;
      }
      if (peek() == '}') {
        ++pos_;
        return v;
      }
      fail("expected ',' or '}' in inline table");
    }
  }

  Value parse_number() {
    std::string token;
    while (!at_end() && (is_bare(peek()) || peek() == '+' || peek() == '.')) {
      const char c = get();
      if (c != '_') token.push_back(c);
    }
    if (token.empty()) fail("expected a value");
    Value v;
    v.line = line_;
    std::string_view body = token;
    double sign = 1.0;
    if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
      sign = body.front() == '-' ? -1.0 : 1.0;
      body.remove_prefix(1);
    }
    if (body == "inf" || body == "nan") {
      v.kind = Value::Kind::floating;
      v.floating = body == "inf" ? sign * std::numeric_limits<double>::infinity()
                                 : std::numeric_limits<double>::quiet_NaN();
      return v;
    }
    const bool is_float = token.find_first_of(".eE") != std::string::npos;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (*first == '+') ++first;
    if (is_float) {
      v.kind = Value::Kind::floating;
      const auto [ptr, ec] = std::from_chars(first, last, v.floating);
      if (ec != std::errc() || ptr != last) fail("invalid number '" + token + "'");
    } else {
      v.kind = Value::Kind::integer;
      const auto [ptr, ec] = std::from_chars(first, last, v.integer);
      if (ec != std::errc() || ptr != last) fail("invalid value '" + token + "'");
    }
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::vector<std::string> defined_tables_;
};

}  // namespace

Value parse(std::string_view text) { return Parser(text).parse_document(); }

Value parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("scenario", "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace formpc::toml
