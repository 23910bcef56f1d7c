#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "f4ms/util.hpp"

namespace f4ms::tree {

struct SourceLocation {
  std::string file;
  int line = 1;
  int column = 1;
  std::string path;  // field path, e.g. "spg.connectors[2].targets"
};

enum class DiagCategory { Syntax, Schema, Validation };

std::string to_string(DiagCategory c);

struct Diagnostic {
  DiagCategory category = DiagCategory::Syntax;
  SourceLocation where;
  std::string message;
};

// "<file>:<line>:<col>: <category>: <message>"
std::string format_diagnostic(const Diagnostic& d);

// Exact decimal scalar, micro-unit representation (see util.hpp).
struct Number {
  micros_t micros = 0;
  auto operator<=>(const Number&) const = default;
};

// One node of the canonical key-value tree syntax. Objects keep insertion
// order; canonical forms fix their own key orders.
struct Value {
  using List = std::vector<Value>;
  using Object = std::vector<std::pair<std::string, Value>>;
  using Data = std::variant<std::string, Number, bool, List, Object>;

  Data data = Object{};
  SourceLocation loc;

  static Value str(std::string s) { return Value{Data{std::move(s)}, {}}; }
  static Value num(micros_t micros) { return Value{Data{Number{micros}}, {}}; }
  static Value integer(std::int64_t n) { return num(n * kMicrosPerUnit); }
  static Value boolean(bool b) { return Value{Data{b}, {}}; }
  static Value list() { return Value{Data{List{}}, {}}; }
  static Value object() { return Value{Data{Object{}}, {}}; }

  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_number() const { return std::holds_alternative<Number>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_list() const { return std::holds_alternative<List>(data); }
  bool is_object() const { return std::holds_alternative<Object>(data); }

  const std::string& as_string() const { return std::get<std::string>(data); }
  micros_t as_micros() const { return std::get<Number>(data).micros; }
  bool as_bool() const { return std::get<bool>(data); }
  const List& as_list() const { return std::get<List>(data); }
  List& as_list() { return std::get<List>(data); }
  const Object& as_object() const { return std::get<Object>(data); }
  Object& as_object() { return std::get<Object>(data); }

  // Object lookup; nullptr when absent or not an object.
  const Value* find(std::string_view key) const;

  Value& push(std::string key, Value v) {
    auto& obj = std::get<Object>(data);
    obj.emplace_back(std::move(key), std::move(v));
    return obj.back().second;
  }

  Value& append(Value v) {
    auto& lst = std::get<List>(data);
    lst.push_back(std::move(v));
    return lst.back();
  }

  // Structural equality; locations are ignored.
  friend bool operator==(const Value& a, const Value& b);
};

struct ParseResult {
  std::optional<Value> root;  // root object; set iff diagnostics empty
  std::vector<Diagnostic> diagnostics;
};

// Parses a document: a sequence of key/value pairs forming the root object.
// `#` comments run to end of line. Stops at the first syntax error.
ParseResult parse_tree(std::string_view text, std::string file_name = "");

// Canonical multi-line rendering of the root object (without outer braces).
// Pure function of the value: identical inputs give byte-identical output.
std::string write_tree(const Value& root);

// Canonical single-line rendering, used in trace detail fields.
std::string write_inline(const Value& v);

bool valid_identifier(std::string_view s);

}  // namespace f4ms::tree
