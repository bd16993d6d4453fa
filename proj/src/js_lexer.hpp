#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spo/common.hpp"

namespace spo::js::detail {

enum class Tok { Ident, Num, Str, Template, Regex, Punct, Eof };

struct Token {
  Tok type = Tok::Eof;
  std::string text;  // identifier name, punctuator, cooked string, raw number/regex
  Span span;
  bool nl_before = false;
  // Template: cooked quasis concatenated, plus byte ranges of ${...} bodies.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> subst;
};

/// Tokenizes [begin, end) of `src`. Offsets in spans are absolute.
class Lexer {
 public:
  Lexer(std::string_view src, std::uint32_t begin, std::uint32_t end, std::uint32_t line, std::uint32_t col);

  std::vector<Token> run();

 private:
  [[noreturn]] void error(const std::string& msg) const;
  char peek(std::size_t ahead = 0) const;
  void advance(std::size_t n = 1);
  bool regex_allowed() const;
  void skip_space_and_comments(bool& newline);
  Token lex_string(char quote);
  Token lex_template();
  Token lex_number();
  Token lex_regex();
  Token lex_ident();
  Token lex_punct();
  std::uint32_t skip_template_substitution();

  std::string_view src_;
  std::uint32_t pos_;
  std::uint32_t end_;
  std::uint32_t line_;
  std::uint32_t col_;
  std::vector<Token> out_;
};

void append_utf8(std::string& out, std::uint32_t cp);

}  // namespace spo::js::detail
