#include "f4ms/tree.hpp"

#include <cctype>
#include <set>

namespace f4ms::tree {

std::string to_string(DiagCategory c) {
  switch (c) {
    case DiagCategory::Syntax: return "SyntaxError";
    case DiagCategory::Schema: return "SchemaError";
    case DiagCategory::Validation: return "ValidationError";
  }
  return "?";
}

std::string format_diagnostic(const Diagnostic& d) {
  std::string out = d.where.file;
  out += ':';
  out += std::to_string(d.where.line);
  out += ':';
  out += std::to_string(d.where.column);
  out += ": ";
  out += to_string(d.category);
  out += ": ";
  out += d.message;
  if (!d.where.path.empty()) {
    out += " (at ";
    out += d.where.path;
    out += ')';
  }
  return out;
}

const Value* Value::find(std::string_view key) const {
  if (!is_object()) return nullptr;
  for (const auto& [k, v] : as_object()) {
    if (k == key) return &v;
  }
  return nullptr;
}

bool operator==(const Value& a, const Value& b) {
  if (a.data.index() != b.data.index()) return false;
  if (a.is_string()) return a.as_string() == b.as_string();
  if (a.is_number()) return a.as_micros() == b.as_micros();
  if (a.is_bool()) return a.as_bool() == b.as_bool();
  if (a.is_list()) {
    const auto& la = a.as_list();
    const auto& lb = b.as_list();
    if (la.size() != lb.size()) return false;
    for (std::size_t i = 0; i < la.size(); ++i)
      if (!(la[i] == lb[i])) return false;
    return true;
  }
  const auto& oa = a.as_object();
  const auto& ob = b.as_object();
  if (oa.size() != ob.size()) return false;
  for (std::size_t i = 0; i < oa.size(); ++i) {
    if (oa[i].first != ob[i].first) return false;
    if (!(oa[i].second == ob[i].second)) return false;
  }
  return true;
}

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_')
    return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

namespace {

enum class TokKind { LBrace, RBrace, LBrack, RBrack, String, Number, Bareword, End };

struct Token {
  TokKind kind;
  std::string text;   // decoded string / bareword / raw number text
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  Lexer(std::string_view text, std::string file, std::vector<Diagnostic>& diags)
      : text_(text), file_(std::move(file)), diags_(diags) {}

  // Returns false when a syntax error was recorded.
  bool next(Token& tok) {
    skip_space();
    tok.line = line_;
    tok.col = col_;
    if (pos_ >= text_.size()) {
      tok.kind = TokKind::End;
      return true;
    }
    char c = text_[pos_];
    switch (c) {
      case '{': advance(); tok.kind = TokKind::LBrace; return true;
      case '}': advance(); tok.kind = TokKind::RBrace; return true;
      case '[': advance(); tok.kind = TokKind::LBrack; return true;
      case ']': advance(); tok.kind = TokKind::RBrack; return true;
      case '"': return lex_string(tok);
      default: break;
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c)))
      return lex_number(tok);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return lex_bareword(tok);
    error(line_, col_, std::string("unexpected character '") + c + "'");
    return false;
  }

  void error(int line, int col, std::string msg) {
    diags_.push_back(Diagnostic{DiagCategory::Syntax,
                                SourceLocation{file_, line, col, ""},
                                std::move(msg)});
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  bool lex_string(Token& tok) {
    tok.kind = TokKind::String;
    tok.text.clear();
    int sline = line_, scol = col_;
    advance();  // opening quote
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '"') {
        advance();
        return true;
      }
      if (c == '\n') break;
      if (c == '\\') {
        advance();
        if (pos_ >= text_.size()) break;
        char esc = text_[pos_];
        switch (esc) {
          case '"': tok.text.push_back('"'); break;
          case '\\': tok.text.push_back('\\'); break;
          case 'n': tok.text.push_back('\n'); break;
          case 't': tok.text.push_back('\t'); break;
          default:
            error(line_, col_, std::string("unknown escape '\\") + esc + "'");
            return false;
        }
        advance();
      } else {
        tok.text.push_back(c);
        advance();
      }
    }
    error(sline, scol, "unterminated string");
    return false;
  }

  bool lex_number(Token& tok) {
    tok.kind = TokKind::Number;
    tok.text.clear();
    int sline = line_, scol = col_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.') {
        tok.text.push_back(c);
        advance();
      } else if (std::isalpha(static_cast<unsigned char>(c))) {
        error(sline, scol, "malformed number (exponents are not allowed)");
        return false;
      } else {
        break;
      }
    }
    if (!parse_decimal_micros(tok.text)) {
      error(sline, scol,
            "malformed number '" + tok.text +
                "' (decimal, at most 6 fractional digits)");
      return false;
    }
    return true;
  }

  bool lex_bareword(Token& tok) {
    tok.kind = TokKind::Bareword;
    tok.text.clear();
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
        tok.text.push_back(c);
        advance();
      } else {
        break;
      }
    }
    return true;
  }

  std::string_view text_;
  std::string file_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::string_view text, std::string file, std::vector<Diagnostic>& diags)
      : lexer_(text, file, diags), file_(std::move(file)), diags_(diags) {}

  std::optional<Value> parse_document() {
    if (!pump()) return std::nullopt;
    if (tok_.kind == TokKind::End) {
      diags_.push_back(Diagnostic{DiagCategory::Syntax,
                                  SourceLocation{file_, 1, 1, ""},
                                  "empty document"});
      return std::nullopt;
    }
    Value root = Value::object();
    root.loc = loc_of(tok_);
    if (!parse_pairs(root, TokKind::End)) return std::nullopt;
    return root;
  }

 private:
  SourceLocation loc_of(const Token& t) const {
    return SourceLocation{file_, t.line, t.col, ""};
  }

  bool pump() { return lexer_.next(tok_); }

  // Parses pairs until `stop`; consumes the stop token.
  bool parse_pairs(Value& object, TokKind stop) {
    std::set<std::string> seen;
    while (true) {
      if (tok_.kind == stop) return true;
      if (tok_.kind != TokKind::Bareword || tok_.text == "true" ||
          tok_.text == "false") {
        lexer_.error(tok_.line, tok_.col, "expected a key");
        return false;
      }
      std::string key = tok_.text;
      if (!seen.insert(key).second) {
        lexer_.error(tok_.line, tok_.col, "duplicate key '" + key + "'");
        return false;
      }
      if (!pump()) return false;
      Value v;
      if (!parse_value(v)) return false;
      object.push(std::move(key), std::move(v));
    }
  }

  bool parse_value(Value& out) {
    switch (tok_.kind) {
      case TokKind::String:
        out = Value::str(tok_.text);
        out.loc = loc_of(tok_);
        return pump();
      case TokKind::Number: {
        auto micros = parse_decimal_micros(tok_.text);
        out = Value::num(*micros);
        out.loc = loc_of(tok_);
        return pump();
      }
      case TokKind::Bareword:
        if (tok_.text == "true" || tok_.text == "false") {
          out = Value::boolean(tok_.text == "true");
          out.loc = loc_of(tok_);
          return pump();
        }
        lexer_.error(tok_.line, tok_.col,
                     "unexpected bareword '" + tok_.text + "' (strings are quoted)");
        return false;
      case TokKind::LBrace: {
        out = Value::object();
        out.loc = loc_of(tok_);
        if (!pump()) return false;
        return parse_pairs(out, TokKind::RBrace) && pump_after_close();
      }
      case TokKind::LBrack: {
        out = Value::list();
        out.loc = loc_of(tok_);
        if (!pump()) return false;
        while (tok_.kind != TokKind::RBrack) {
          if (tok_.kind == TokKind::End) {
            lexer_.error(out.loc.line, out.loc.column, "unterminated list");
            return false;
          }
          Value item;
          if (!parse_value(item)) return false;
          out.append(std::move(item));
        }
        return pump_after_close();
      }
      default:
        lexer_.error(tok_.line, tok_.col, "expected a value");
        return false;
    }
  }

  bool pump_after_close() { return pump(); }

  Lexer lexer_;
  std::string file_;
  std::vector<Diagnostic>& diags_;
  Token tok_;
};

void escape_into(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
}

void write_scalar(std::string& out, const Value& v) {
  if (v.is_string()) {
    escape_into(out, v.as_string());
  } else if (v.is_number()) {
    out += format_micros_canonical(v.as_micros());
  } else {
    out += v.as_bool() ? "true" : "false";
  }
}

bool is_scalar(const Value& v) {
  return v.is_string() || v.is_number() || v.is_bool();
}

// A value renders on one line when it is a scalar, a list of scalars, or an
// object whose values are scalars or scalar lists.
bool inline_ok(const Value& v) {
  if (is_scalar(v)) return true;
  if (v.is_list()) {
    for (const auto& item : v.as_list())
      if (!is_scalar(item)) return false;
    return true;
  }
  for (const auto& [k, val] : v.as_object()) {
    (void)k;
    if (is_scalar(val)) continue;
    if (val.is_list()) {
      for (const auto& item : val.as_list())
        if (!is_scalar(item)) return false;
      continue;
    }
    return false;
  }
  return true;
}

void write_inline_into(std::string& out, const Value& v) {
  if (is_scalar(v)) {
    write_scalar(out, v);
    return;
  }
  if (v.is_list()) {
    out.push_back('[');
    bool first = true;
    for (const auto& item : v.as_list()) {
      if (!first) out.push_back(' ');
      first = false;
      write_inline_into(out, item);
    }
    out.push_back(']');
    return;
  }
  out.push_back('{');
  bool first = true;
  for (const auto& [k, val] : v.as_object()) {
    if (!first) out.push_back(' ');
    first = false;
    out += k;
    out.push_back(' ');
    write_inline_into(out, val);
  }
  out.push_back('}');
}

void indent_into(std::string& out, int depth) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
}

void write_block_value(std::string& out, const Value& v, int depth);

void write_block_pairs(std::string& out, const Value::Object& obj, int depth) {
  for (const auto& [key, val] : obj) {
    indent_into(out, depth);
    out += key;
    out.push_back(' ');
    if (inline_ok(val)) {
      write_inline_into(out, val);
      out.push_back('\n');
    } else {
      write_block_value(out, val, depth);
    }
  }
}

// Writes a non-inlineable object or list opener/body/closer; the key and a
// trailing space are already emitted.
void write_block_value(std::string& out, const Value& v, int depth) {
  if (v.is_object()) {
    out += "{\n";
    write_block_pairs(out, v.as_object(), depth + 1);
    indent_into(out, depth);
    out += "}\n";
    return;
  }
  out += "[\n";
  for (const auto& item : v.as_list()) {
    indent_into(out, depth + 1);
    if (inline_ok(item)) {
      write_inline_into(out, item);
      out.push_back('\n');
    } else if (item.is_object()) {
      out += "{\n";
      write_block_pairs(out, item.as_object(), depth + 2);
      indent_into(out, depth + 1);
      out += "}\n";
    } else {
      write_block_value(out, item, depth + 1);
    }
  }
  indent_into(out, depth);
  out += "]\n";
}

}  // namespace

ParseResult parse_tree(std::string_view text, std::string file_name) {
  ParseResult result;
  Parser parser(text, std::move(file_name), result.diagnostics);
  result.root = parser.parse_document();
  if (!result.diagnostics.empty()) result.root.reset();
  return result;
}

std::string write_tree(const Value& root) {
  std::string out;
  write_block_pairs(out, root.as_object(), 0);
  return out;
}

std::string write_inline(const Value& v) {
  std::string out;
  write_inline_into(out, v);
  return out;
}

}  // namespace f4ms::tree
