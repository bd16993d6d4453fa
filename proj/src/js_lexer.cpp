#include "js_lexer.hpp"

#include <array>
#include <string_view>

namespace spo::js::detail {

namespace {

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' ||
         static_cast<unsigned char>(c) >= 0x80;
}
bool ident_part(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_hex(char c) { return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); }
int hex_val(char c) {
  if (is_digit(c)) return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return c - 'A' + 10;
}

constexpr std::array<std::string_view, 52> kPuncts = {
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "?\?=",
    "=>", "==", "!=", "<=", ">=", "&&", "||", "??", "?.", "++", "--", "+=", "-=",
    "*=", "/=", "%=", "&=", "|=", "^=", "**", "<<", ">>",
    "{", "}", "(", ")", "[", "]", ";", ",", "<", ">", "+", "-", "*", "/", "%", "&", "|", "^", "!"};
constexpr std::string_view kSingles = "~?:=.@#";

bool keyword_allows_regex(std::string_view w) {
  static constexpr std::array<std::string_view, 15> kw = {
      "return", "typeof", "instanceof", "in", "of", "new", "delete", "void", "throw",
      "case", "do", "else", "yield", "await", "export"};
  for (auto k : kw)
    if (k == w) return true;
  return false;
}

}  // namespace

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

Lexer::Lexer(std::string_view src, std::uint32_t begin, std::uint32_t end, std::uint32_t line,
             std::uint32_t col)
    : src_(src), pos_(begin), end_(end), line_(line), col_(col) {}

void Lexer::error(const std::string& msg) const { throw ParseError(msg, line_, col_); }

char Lexer::peek(std::size_t ahead) const {
  return pos_ + ahead < end_ ? src_[pos_ + ahead] : '\0';
}

void Lexer::advance(std::size_t n) {
  for (std::size_t i = 0; i < n && pos_ < end_; ++i) {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(src_[pos_]) & 0xC0) != 0x80) {
      ++col_;
    }
    ++pos_;
  }
}

bool Lexer::regex_allowed() const {
  if (out_.empty()) return true;
  const Token& t = out_.back();
  switch (t.type) {
    case Tok::Num:
    case Tok::Str:
    case Tok::Template:
    case Tok::Regex:
      return false;
    case Tok::Ident:
      return keyword_allows_regex(t.text);
    case Tok::Punct:
      return !(t.text == ")" || t.text == "]" || t.text == "}" || t.text == "++" || t.text == "--");
    case Tok::Eof:
      return true;
  }
  return true;
}

void Lexer::skip_space_and_comments(bool& newline) {
  while (pos_ < end_) {
    char c = peek();
    if (c == '\n') {
      newline = true;
      advance();
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
      advance();
    } else if (static_cast<unsigned char>(c) == 0xEF && static_cast<unsigned char>(peek(1)) == 0xBB &&
               static_cast<unsigned char>(peek(2)) == 0xBF) {
      advance(3);  // BOM
    } else if (static_cast<unsigned char>(c) == 0xC2 && static_cast<unsigned char>(peek(1)) == 0xA0) {
      advance(2);
    } else if (c == '/' && peek(1) == '/') {
      while (pos_ < end_ && peek() != '\n') advance();
    } else if (c == '/' && peek(1) == '*') {
      std::uint32_t l = line_, cc = col_;
      advance(2);
      while (pos_ < end_ && !(peek() == '*' && peek(1) == '/')) {
        if (peek() == '\n') newline = true;
        advance();
      }
      if (pos_ >= end_) throw ParseError("unterminated comment", l, cc);
      advance(2);
    } else {
      break;
    }
  }
}

std::vector<Token> Lexer::run() {
  for (;;) {
    bool nl = false;
    skip_space_and_comments(nl);
    Token t;
    if (pos_ >= end_) {
      t.type = Tok::Eof;
      t.span = {pos_, pos_, line_, col_};
      t.nl_before = true;
      out_.push_back(std::move(t));
      return std::move(out_);
    }
    char c = peek();
    if (c == '"' || c == '\'') {
      t = lex_string(c);
    } else if (c == '`') {
      t = lex_template();
    } else if (is_digit(c) || (c == '.' && is_digit(peek(1)))) {
      t = lex_number();
    } else if (ident_start(c)) {
      t = lex_ident();
    } else if (c == '/' && regex_allowed()) {
      t = lex_regex();
    } else {
      t = lex_punct();
    }
    t.nl_before = nl;
    out_.push_back(std::move(t));
  }
}

Token Lexer::lex_string(char quote) {
  Token t;
  t.type = Tok::Str;
  t.span = {pos_, 0, line_, col_};
  advance();
  std::string val;
  for (;;) {
    if (pos_ >= end_ || peek() == '\n') throw ParseError("unterminated string", t.span.line, t.span.col);
    char c = peek();
    if (c == quote) {
      advance();
      break;
    }
    if (c == '\\') {
      advance();
      char e = peek();
      switch (e) {
        case 'n': val.push_back('\n'); advance(); break;
        case 't': val.push_back('\t'); advance(); break;
        case 'r': val.push_back('\r'); advance(); break;
        case 'b': val.push_back('\b'); advance(); break;
        case 'f': val.push_back('\f'); advance(); break;
        case 'v': val.push_back('\v'); advance(); break;
        case '0': val.push_back('\0'); advance(); break;
        case '\r':
          advance();
          if (peek() == '\n') advance();
          break;
        case '\n': advance(); break;
        case 'x': {
          advance();
          if (!is_hex(peek()) || !is_hex(peek(1))) error("bad \\x escape");
          val.push_back(static_cast<char>(hex_val(peek()) * 16 + hex_val(peek(1))));
          advance(2);
          break;
        }
        case 'u': {
          advance();
          std::uint32_t cp = 0;
          if (peek() == '{') {
            advance();
            while (is_hex(peek())) {
              cp = cp * 16 + static_cast<std::uint32_t>(hex_val(peek()));
              advance();
            }
            if (peek() != '}') error("bad \\u{} escape");
            advance();
          } else {
            for (int i = 0; i < 4; ++i) {
              if (!is_hex(peek())) error("bad \\u escape");
              cp = cp * 16 + static_cast<std::uint32_t>(hex_val(peek()));
              advance();
            }
          }
          append_utf8(val, cp);
          break;
        }
        default:
          if (pos_ >= end_) throw ParseError("unterminated string", t.span.line, t.span.col);
          val.push_back(e);
          advance();
      }
      continue;
    }
    val.push_back(c);
    advance();
  }
  t.text = std::move(val);
  t.span.end = pos_;
  return t;
}

// Returns the offset of the '}' closing a ${ substitution; pos_ is left
// just past it.
std::uint32_t Lexer::skip_template_substitution() {
  int depth = 1;
  std::uint32_t l = line_, cc = col_;
  while (pos_ < end_) {
    char c = peek();
    if (c == '{') {
      ++depth;
      advance();
    } else if (c == '}') {
      if (--depth == 0) {
        std::uint32_t close = pos_;
        advance();
        return close;
      }
      advance();
    } else if (c == '"' || c == '\'') {
      lex_string(c);
    } else if (c == '`') {
      lex_template();
    } else if (c == '/' && peek(1) == '/') {
      while (pos_ < end_ && peek() != '\n') advance();
    } else if (c == '/' && peek(1) == '*') {
      advance(2);
      while (pos_ < end_ && !(peek() == '*' && peek(1) == '/')) advance();
      advance(2);
    } else {
      advance();
    }
  }
  throw ParseError("unterminated template substitution", l, cc);
}

Token Lexer::lex_template() {
  Token t;
  t.type = Tok::Template;
  t.span = {pos_, 0, line_, col_};
  advance();
  std::string val;
  for (;;) {
    if (pos_ >= end_) throw ParseError("unterminated template", t.span.line, t.span.col);
    char c = peek();
    if (c == '`') {
      advance();
      break;
    }
    if (c == '\\') {
      advance();
      char e = peek();
      if (e == 'n') val.push_back('\n');
      else if (e == 't') val.push_back('\t');
      else val.push_back(e);
      advance();
      continue;
    }
    if (c == '$' && peek(1) == '{') {
      advance(2);
      std::uint32_t start = pos_;
      std::uint32_t close = skip_template_substitution();
      t.subst.emplace_back(start, close);
      continue;
    }
    val.push_back(c);
    advance();
  }
  t.text = std::move(val);
  t.span.end = pos_;
  return t;
}

Token Lexer::lex_number() {
  Token t;
  t.type = Tok::Num;
  t.span = {pos_, 0, line_, col_};
  std::uint32_t start = pos_;
  if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X' || peek(1) == 'o' || peek(1) == 'O' ||
                        peek(1) == 'b' || peek(1) == 'B')) {
    advance(2);
    while (is_hex(peek()) || peek() == '_') advance();
  } else {
    while (is_digit(peek()) || peek() == '_') advance();
    if (peek() == '.') {
      advance();
      while (is_digit(peek()) || peek() == '_') advance();
    }
    if (peek() == 'e' || peek() == 'E') {
      advance();
      if (peek() == '+' || peek() == '-') advance();
      if (!is_digit(peek())) error("bad exponent");
      while (is_digit(peek())) advance();
    }
  }
  if (peek() == 'n') advance();
  if (ident_start(peek())) error("identifier directly after number");
  t.text = std::string(src_.substr(start, pos_ - start));
  t.span.end = pos_;
  return t;
}

Token Lexer::lex_regex() {
  Token t;
  t.type = Tok::Regex;
  t.span = {pos_, 0, line_, col_};
  std::uint32_t start = pos_;
  advance();
  bool in_class = false;
  for (;;) {
    if (pos_ >= end_ || peek() == '\n') throw ParseError("unterminated regex", t.span.line, t.span.col);
    char c = peek();
    if (c == '\\') {
      advance(2);
      continue;
    }
    if (c == '[') in_class = true;
    else if (c == ']') in_class = false;
    else if (c == '/' && !in_class) {
      advance();
      break;
    }
    advance();
  }
  while (ident_part(peek())) advance();
  t.text = std::string(src_.substr(start, pos_ - start));
  t.span.end = pos_;
  return t;
}

Token Lexer::lex_ident() {
  Token t;
  t.type = Tok::Ident;
  t.span = {pos_, 0, line_, col_};
  std::uint32_t start = pos_;
  while (pos_ < end_ && ident_part(peek())) advance();
  t.text = std::string(src_.substr(start, pos_ - start));
  t.span.end = pos_;
  return t;
}

Token Lexer::lex_punct() {
  Token t;
  t.type = Tok::Punct;
  t.span = {pos_, 0, line_, col_};
  std::string_view rest = src_.substr(pos_, end_ - pos_);
  for (auto p : kPuncts) {
    if (rest.starts_with(p)) {
      if (p == "?." && rest.size() > 2 && is_digit(rest[2])) continue;
      t.text = std::string(p);
      advance(p.size());
      t.span.end = pos_;
      return t;
    }
  }
  if (kSingles.find(rest.front()) != std::string_view::npos) {
    t.text = std::string(1, rest.front());
    advance();
    t.span.end = pos_;
    return t;
  }
  error(std::string("unexpected character '") + rest.front() + "'");
}

}  // namespace spo::js::detail
