#include "spo/js_parser.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "js_lexer.hpp"

namespace spo::js {

namespace {

using detail::Lexer;
using detail::Tok;
using detail::Token;

constexpr int kMaxDepth = 400;

bool is_reserved(std::string_view w) {
  static constexpr std::array<std::string_view, 36> kw = {
      "break",  "case",     "catch",  "class",  "const",    "continue", "debugger", "default", "delete",
      "do",     "else",     "export", "extends", "finally", "for",      "function", "if",      "import",
      "in",     "instanceof", "new",  "return", "super",    "switch",   "this",     "throw",   "try",
      "typeof", "var",      "void",   "while",  "with",     "true",     "false",    "null",    "enum"};
  return std::find(kw.begin(), kw.end(), w) != kw.end();
}

bool is_assign_op(const Token& t) {
  static constexpr std::array<std::string_view, 16> ops = {
      "=", "+=", "-=", "*=", "/=", "%=", "**=", "<<=", ">>=", ">>>=", "&=", "|=", "^=", "&&=", "||=", "?\?="};
  return t.type == Tok::Punct && std::find(ops.begin(), ops.end(), t.text) != ops.end();
}

int binary_prec(const Token& t, bool no_in) {
  if (t.type == Tok::Ident) {
    if (t.text == "instanceof") return 8;
    if (t.text == "in" && !no_in) return 8;
    return 0;
  }
  if (t.type != Tok::Punct) return 0;
  const std::string& s = t.text;
  if (s == "??") return 1;
  if (s == "||") return 2;
  if (s == "&&") return 3;
  if (s == "|") return 4;
  if (s == "^") return 5;
  if (s == "&") return 6;
  if (s == "==" || s == "!=" || s == "===" || s == "!==") return 7;
  if (s == "<" || s == ">" || s == "<=" || s == ">=") return 8;
  if (s == "<<" || s == ">>" || s == ">>>") return 9;
  if (s == "+" || s == "-") return 10;
  if (s == "*" || s == "/" || s == "%") return 11;
  if (s == "**") return 12;
  return 0;
}

struct LineTable {
  std::string_view src;
  std::vector<std::uint32_t> starts{0};

  explicit LineTable(std::string_view s) : src(s) {
    for (std::uint32_t i = 0; i < s.size(); ++i)
      if (s[i] == '\n') starts.push_back(i + 1);
  }

  std::pair<std::uint32_t, std::uint32_t> at(std::uint32_t off) const {
    auto it = std::upper_bound(starts.begin(), starts.end(), off);
    auto line = static_cast<std::uint32_t>(it - starts.begin());
    std::uint32_t col = 1;
    for (std::uint32_t i = starts[line - 1]; i < off; ++i)
      if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) ++col;
    return {line, col};
  }
};

void collect_identifiers(const Node& n, std::set<std::string>& out) {
  walk(n, [&](const Node& k) {
    if (k.kind == NodeKind::Identifier) out.insert(k.name);
    if (k.kind == NodeKind::Opaque) out.insert(k.reads.begin(), k.reads.end());
    return true;
  });
}

// Identifiers mentioned inside a string that is handed to eval/Function.
void collect_string_identifiers(const std::string& code, std::set<std::string>& out) {
  try {
    Lexer lx(code, 0, static_cast<std::uint32_t>(code.size()), 1, 1);
    auto toks = lx.run();
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].type != Tok::Ident || is_reserved(toks[i].text)) continue;
      if (i > 0 && toks[i - 1].type == Tok::Punct && (toks[i - 1].text == "." || toks[i - 1].text == "?."))
        continue;
      out.insert(toks[i].text);
    }
  } catch (const ParseError&) {
  }
}

void collect_written(const Node& n, std::set<std::string>& out) {
  walk(n, [&](const Node& k) {
    if ((k.kind == NodeKind::Assignment || k.kind == NodeKind::Update || k.kind == NodeKind::Declarator) &&
        k.kid(0)) {
      walk(*k.kid(0), [&](const Node& t) {
        if (t.kind == NodeKind::Identifier) out.insert(t.name);
        return t.kind != NodeKind::DefaultValue || &t == k.kid(0);
      });
    }
    if (k.kind == NodeKind::Opaque) out.insert(k.writes.begin(), k.writes.end());
    return true;
  });
}

class Parser {
 public:
  Parser(std::string_view src, std::vector<Token> toks, const LineTable& lines)
      : src_(src), toks_(std::move(toks)), lines_(lines) {}

  NodePtr parse_program() {
    auto prog = make(NodeKind::Program, cur());
    while (cur().type != Tok::Eof) prog->add(parse_statement());
    prog->span.end = cur().span.end;
    return prog;
  }

  NodePtr parse_standalone_expression() {
    auto e = parse_expression(false);
    if (cur().type != Tok::Eof) fail("unexpected token in template substitution");
    return e;
  }

 private:
  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxDepth) p.fail("nesting too deep");
    }
    ~DepthGuard() { --p.depth_; }
  };

  const Token& cur() const { return toks_[i_]; }
  const Token& at(std::size_t k) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  bool punct(std::string_view p) const { return cur().type == Tok::Punct && cur().text == p; }
  bool word(std::string_view w) const { return cur().type == Tok::Ident && cur().text == w; }
  static bool punct_at(const Token& t, std::string_view p) { return t.type == Tok::Punct && t.text == p; }

  const Token& next() {
    const Token& t = toks_[i_];
    prev_end_ = t.span.end;
    if (i_ + 1 < toks_.size()) ++i_;
    return t;
  }
  bool eat(std::string_view p) {
    if (!punct(p)) return false;
    next();
    return true;
  }
  bool eat_word(std::string_view w) {
    if (!word(w)) return false;
    next();
    return true;
  }
  void expect(std::string_view p) {
    if (!eat(p)) fail("expected '" + std::string(p) + "'");
  }
  void expect_word(std::string_view w) {
    if (!eat_word(w)) fail("expected '" + std::string(w) + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    std::string near = cur().type == Tok::Eof ? "end of input" : "'" + cur().text + "'";
    throw ParseError(msg + " near " + near, cur().span.line, cur().span.col);
  }

  NodePtr make(NodeKind k, const Token& start) const {
    return std::make_unique<Node>(k, Span{start.span.begin, start.span.end, start.span.line, start.span.col});
  }
  NodePtr make_at(NodeKind k, const Node& start) const {
    return std::make_unique<Node>(k, Span{start.span.begin, start.span.end, start.span.line, start.span.col});
  }
  NodePtr finish(NodePtr n) const {
    n->span.end = std::max(n->span.begin, prev_end_);
    return n;
  }

  void consume_semicolon() {
    if (eat(";")) return;
    if (punct("}") || cur().type == Tok::Eof || cur().nl_before) return;
    fail("expected ';'");
  }

  // Index of the token closing the bracket at token index `open`, or npos.
  std::size_t matching(std::size_t open) const {
    int depth = 0;
    for (std::size_t k = open; k < toks_.size(); ++k) {
      const Token& t = toks_[k];
      if (t.type != Tok::Punct) continue;
      if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
      else if (t.text == ")" || t.text == "]" || t.text == "}") {
        if (--depth == 0) return k;
      }
    }
    return std::string::npos;
  }

  bool paren_arrow_at(std::size_t open) const {
    std::size_t close = matching(open);
    return close != std::string::npos && close + 1 < toks_.size() && punct_at(toks_[close + 1], "=>");
  }

  // ---- statements -------------------------------------------------------

  NodePtr parse_statement() {
    DepthGuard g(*this);
    const Token& t = cur();
    if (t.type == Tok::Punct) {
      if (t.text == "{") return parse_block();
      if (t.text == ";") {
        auto n = make(NodeKind::Empty, t);
        next();
        return n;
      }
    } else if (t.type == Tok::Ident) {
      const std::string& w = t.text;
      if (w == "var" || w == "const" ||
          (w == "let" && (at(1).type == Tok::Ident || punct_at(at(1), "[") || punct_at(at(1), "{")))) {
        auto d = parse_var_decl(false);
        consume_semicolon();
        return finish(std::move(d));
      }
      if (w == "function") return parse_function(false);
      if (w == "async" && at(1).type == Tok::Ident && at(1).text == "function" && !at(1).nl_before) {
        next();
        return parse_function(true);
      }
      if (w == "class") return parse_class();
      if (w == "if") return parse_if();
      if (w == "for") return parse_for();
      if (w == "while") {
        auto n = make(NodeKind::While, t);
        next();
        expect("(");
        n->add(parse_expression(false));
        expect(")");
        n->add(parse_statement());
        return finish(std::move(n));
      }
      if (w == "do") {
        auto n = make(NodeKind::DoWhile, t);
        next();
        n->add(parse_statement());
        expect_word("while");
        expect("(");
        n->add(parse_expression(false));
        expect(")");
        eat(";");
        return finish(std::move(n));
      }
      if (w == "return") {
        auto n = make(NodeKind::Return, t);
        next();
        if (!punct(";") && !punct("}") && cur().type != Tok::Eof && !cur().nl_before)
          n->add(parse_expression(false));
        consume_semicolon();
        return finish(std::move(n));
      }
      if (w == "break" || w == "continue") {
        auto n = make(w == "break" ? NodeKind::Break : NodeKind::Continue, t);
        next();
        if (cur().type == Tok::Ident && !cur().nl_before && !is_reserved(cur().text)) n->name = next().text;
        consume_semicolon();
        return finish(std::move(n));
      }
      if (w == "throw") {
        auto n = make(NodeKind::Throw, t);
        next();
        n->add(parse_expression(false));
        consume_semicolon();
        return finish(std::move(n));
      }
      if (w == "try") return parse_try();
      if (w == "switch") return parse_switch();
      if (w == "with") return parse_with();
      if (w == "debugger") {
        auto n = make(NodeKind::Empty, t);
        next();
        consume_semicolon();
        return finish(std::move(n));
      }
      if (w == "import" && !punct_at(at(1), "(") && !punct_at(at(1), ".")) return parse_import();
      if (w == "export") return parse_export();
      if (!is_reserved(w) && punct_at(at(1), ":")) {
        next();
        next();
        return parse_statement();
      }
    }
    auto n = make(NodeKind::ExprStmt, t);
    n->add(parse_expression(false));
    consume_semicolon();
    return finish(std::move(n));
  }

  NodePtr parse_block() {
    auto n = make(NodeKind::Block, cur());
    expect("{");
    while (!punct("}")) {
      if (cur().type == Tok::Eof) fail("unterminated block");
      n->add(parse_statement());
    }
    next();
    return finish(std::move(n));
  }

  NodePtr parse_var_decl(bool no_in) {
    auto n = make(NodeKind::VarDecl, cur());
    n->name = next().text;
    do {
      auto d = make(NodeKind::Declarator, cur());
      d->add(parse_binding_target());
      if (eat("=")) d->add(parse_assignment(no_in));
      n->add(finish(std::move(d)));
    } while (eat(","));
    return finish(std::move(n));
  }

  NodePtr parse_if() {
    auto n = make(NodeKind::If, cur());
    next();
    expect("(");
    n->add(parse_expression(false));
    expect(")");
    n->add(parse_statement());
    if (eat_word("else")) n->add(parse_statement());
    return finish(std::move(n));
  }

  NodePtr parse_for() {
    const Token& start = cur();
    next();
    eat_word("await");
    expect("(");
    NodePtr init;
    if (punct(";")) {
      init = make(NodeKind::Empty, cur());
    } else if (word("var") || word("const") ||
               (word("let") && (at(1).type == Tok::Ident || punct_at(at(1), "[") || punct_at(at(1), "{")))) {
      init = parse_var_decl(true);
    } else {
      init = parse_expression(true);
    }
    if (word("of") || word("in")) {
      auto n = make(word("of") ? NodeKind::ForOf : NodeKind::ForIn, start);
      bool of = word("of");
      next();
      n->add(std::move(init));
      n->add(of ? parse_assignment(false) : parse_expression(false));
      expect(")");
      n->add(parse_statement());
      return finish(std::move(n));
    }
    auto n = make(NodeKind::For, start);
    n->add(std::move(init));
    expect(";");
    n->add(punct(";") ? make(NodeKind::Empty, cur()) : parse_expression(false));
    expect(";");
    n->add(punct(")") ? make(NodeKind::Empty, cur()) : parse_expression(false));
    expect(")");
    n->add(parse_statement());
    return finish(std::move(n));
  }

  NodePtr parse_try() {
    auto n = make(NodeKind::Try, cur());
    next();
    n->add(parse_block());
    if (eat_word("catch")) {
      if (eat("(")) {
        n->add(parse_binding_target());
        expect(")");
      } else {
        n->add(make(NodeKind::Empty, cur()));
      }
      n->add(parse_block());
    } else {
      n->add(make(NodeKind::Empty, cur()));
      n->add(make(NodeKind::Empty, cur()));
    }
    if (eat_word("finally")) n->add(parse_block());
    else n->add(make(NodeKind::Empty, cur()));
    if (n->kid(2)->kind == NodeKind::Empty && n->kid(3)->kind == NodeKind::Empty) fail("try without catch or finally");
    return finish(std::move(n));
  }

  NodePtr parse_switch() {
    auto n = make(NodeKind::Switch, cur());
    next();
    expect("(");
    n->add(parse_expression(false));
    expect(")");
    expect("{");
    while (!punct("}")) {
      auto c = make(NodeKind::Case, cur());
      if (eat_word("case")) {
        c->add(parse_expression(false));
      } else {
        expect_word("default");
        c->add(make(NodeKind::Empty, cur()));
      }
      expect(":");
      while (!punct("}") && !word("case") && !word("default")) {
        if (cur().type == Tok::Eof) fail("unterminated switch");
        c->add(parse_statement());
      }
      n->add(finish(std::move(c)));
    }
    next();
    return finish(std::move(n));
  }

  NodePtr parse_with() {
    auto n = make(NodeKind::Opaque, cur());
    n->name = "with";
    next();
    expect("(");
    n->add(parse_expression(false));
    expect(")");
    n->add(parse_statement());
    std::set<std::string> reads, writes;
    collect_identifiers(*n, reads);
    collect_written(*n->kid(1), writes);
    n->reads.assign(reads.begin(), reads.end());
    n->writes.assign(writes.begin(), writes.end());
    return finish(std::move(n));
  }

  std::string parse_module_name() {
    if (cur().type != Tok::Str) fail("expected module specifier");
    return next().text;
  }

  NodePtr parse_import() {
    auto n = make(NodeKind::Import, cur());
    next();
    if (cur().type == Tok::Str) {
      n->value = next().text;
      consume_semicolon();
      return finish(std::move(n));
    }
    auto spec = [&](const std::string& imported, const Token& local) {
      auto p = make(NodeKind::Property, local);
      p->name = imported;
      auto id = make(NodeKind::Identifier, local);
      id->name = local.text;
      p->add(std::move(id));
      n->add(std::move(p));
    };
    if (cur().type == Tok::Ident && !word("from")) {
      const Token& local = next();
      spec("default", local);
      eat(",");
    } else if (word("from") && at(1).type == Tok::Ident && at(1).text == "from") {
      spec("default", next());
    }
    if (eat("*")) {
      expect_word("as");
      spec("*", next());
    } else if (eat("{")) {
      while (!punct("}")) {
        const Token& imported = next();
        if (eat_word("as")) spec(imported.text, next());
        else spec(imported.text, imported);
        if (!punct("}")) expect(",");
      }
      next();
    }
    expect_word("from");
    n->value = parse_module_name();
    consume_semicolon();
    return finish(std::move(n));
  }

  NodePtr parse_export() {
    auto n = make(NodeKind::Export, cur());
    next();
    if (eat_word("default")) {
      n->is_default = true;
      if (word("function")) n->add(parse_function(false));
      else if (word("async") && at(1).text == "function") {
        next();
        n->add(parse_function(true));
      } else if (word("class")) n->add(parse_class());
      else {
        n->add(parse_assignment(false));
        consume_semicolon();
      }
      return finish(std::move(n));
    }
    if (eat("*")) {
      auto p = make(NodeKind::Property, cur());
      p->name = "*";
      if (eat_word("as")) {
        const Token& t = next();
        auto id = make(NodeKind::Identifier, t);
        id->name = t.text;
        p->add(std::move(id));
      }
      n->add(std::move(p));
      expect_word("from");
      n->value = parse_module_name();
      consume_semicolon();
      return finish(std::move(n));
    }
    if (eat("{")) {
      while (!punct("}")) {
        const Token& local = next();
        const Token* exported = &local;
        if (eat_word("as")) exported = &next();
        auto p = make(NodeKind::Property, local);
        p->name = exported->text;
        auto id = make(NodeKind::Identifier, local);
        id->name = local.text;
        p->add(std::move(id));
        n->add(std::move(p));
        if (!punct("}")) expect(",");
      }
      next();
      if (eat_word("from")) n->value = parse_module_name();
      consume_semicolon();
      return finish(std::move(n));
    }
    n->add(parse_statement());
    return finish(std::move(n));
  }

  // ---- functions, classes, patterns --------------------------------------

  NodePtr parse_function(bool is_async) {
    auto n = make(NodeKind::FunctionDef, cur());
    expect_word("function");
    eat("*");
    n->is_async = is_async;
    if (cur().type == Tok::Ident && !punct("(")) n->name = next().text;
    parse_params_into(*n);
    n->add(parse_block());
    return finish(std::move(n));
  }

  void parse_params_into(Node& fn) {
    expect("(");
    while (!punct(")")) {
      if (punct("...")) {
        auto s = make(NodeKind::Spread, cur());
        next();
        s->add(parse_binding_target());
        fn.add(finish(std::move(s)));
      } else {
        fn.add(parse_binding_element());
      }
      if (!punct(")")) expect(",");
    }
    next();
  }

  NodePtr parse_binding_target() {
    DepthGuard g(*this);
    if (punct("[")) {
      auto n = make(NodeKind::ArrayLiteral, cur());
      next();
      while (!punct("]")) {
        if (punct(",")) {
          n->add(make(NodeKind::Empty, cur()));
          next();
          continue;
        }
        if (punct("...")) {
          auto s = make(NodeKind::Spread, cur());
          next();
          s->add(parse_binding_target());
          n->add(finish(std::move(s)));
        } else {
          n->add(parse_binding_element());
        }
        if (!punct("]")) expect(",");
      }
      next();
      return finish(std::move(n));
    }
    if (punct("{")) {
      auto n = make(NodeKind::ObjectLiteral, cur());
      next();
      while (!punct("}")) {
        if (punct("...")) {
          auto s = make(NodeKind::Spread, cur());
          next();
          s->add(parse_binding_target());
          n->add(finish(std::move(s)));
        } else {
          auto p = make(NodeKind::Property, cur());
          NodePtr key_expr = parse_property_key(*p);
          if (eat(":")) {
            p->add(parse_binding_element());
          } else {
            if (p->computed) fail("computed key needs a binding");
            p->shorthand = true;
            auto id = make_at(NodeKind::Identifier, *p);
            id->name = p->name;
            id->span.end = prev_end_;
            if (punct("=")) {
              auto d = make_at(NodeKind::DefaultValue, *p);
              next();
              d->add(std::move(id));
              d->add(parse_assignment(false));
              p->add(finish(std::move(d)));
            } else {
              p->add(std::move(id));
            }
          }
          if (key_expr) p->add(std::move(key_expr));
          n->add(finish(std::move(p)));
        }
        if (!punct("}")) expect(",");
      }
      next();
      return finish(std::move(n));
    }
    if (cur().type != Tok::Ident || is_reserved(cur().text)) fail("expected binding name");
    auto id = make(NodeKind::Identifier, cur());
    id->name = next().text;
    return id;
  }

  NodePtr parse_binding_element() {
    auto t = parse_binding_target();
    if (punct("=")) {
      auto d = make_at(NodeKind::DefaultValue, *t);
      next();
      d->add(std::move(t));
      d->add(parse_assignment(false));
      return finish(std::move(d));
    }
    return t;
  }

  // Fills name/computed of `prop`; returns the key expression when computed.
  NodePtr parse_property_key(Node& prop) {
    const Token& t = cur();
    if (t.type == Tok::Ident || t.type == Tok::Str || t.type == Tok::Num) {
      prop.name = next().text;
      return nullptr;
    }
    if (punct("#") && at(1).type == Tok::Ident) {
      next();
      prop.name = "#" + next().text;
      return nullptr;
    }
    if (eat("[")) {
      prop.computed = true;
      auto k = parse_assignment(false);
      expect("]");
      if (k->kind == NodeKind::Literal && k->literal != LiteralKind::Regex) prop.name = k->value;
      return k;
    }
    fail("expected property name");
  }

  NodePtr parse_method(const Node& prop, bool is_async) {
    auto fn = make_at(NodeKind::FunctionDef, prop);
    fn->name = prop.name;
    fn->is_async = is_async;
    parse_params_into(*fn);
    fn->add(parse_block());
    return finish(std::move(fn));
  }

  bool modifier_applies() const {
    const Token& n1 = at(1);
    if (n1.type == Tok::Eof) return false;
    if (n1.type == Tok::Punct &&
        (n1.text == "," || n1.text == ":" || n1.text == "(" || n1.text == "}" || n1.text == "=" || n1.text == ";"))
      return false;
    return true;
  }

  NodePtr parse_object_literal() {
    auto n = make(NodeKind::ObjectLiteral, cur());
    next();
    while (!punct("}")) {
      if (cur().type == Tok::Eof) fail("unterminated object literal");
      if (punct("...")) {
        auto s = make(NodeKind::Spread, cur());
        next();
        s->add(parse_assignment(false));
        n->add(finish(std::move(s)));
      } else {
        n->add(parse_member(false));
      }
      if (!punct("}")) expect(",");
    }
    next();
    return finish(std::move(n));
  }

  // Object-literal entry or class member.
  NodePtr parse_member(bool in_class) {
    auto p = make(NodeKind::Property, cur());
    if (in_class && word("static") && modifier_applies()) {
      next();
      p->is_static = true;
      if (punct("{")) {
        auto fn = make(NodeKind::FunctionDef, cur());
        fn->name = "static";
        fn->add(parse_block());
        p->name = "static";
        p->method = true;
        p->add(finish(std::move(fn)));
        return finish(std::move(p));
      }
    }
    bool is_async = false;
    if (word("async") && modifier_applies() && !at(1).nl_before) {
      next();
      is_async = true;
    }
    eat("*");
    if ((word("get") || word("set")) && modifier_applies()) next();
    NodePtr key_expr = parse_property_key(*p);
    if (punct("(")) {
      p->method = true;
      p->add(parse_method(*p, is_async));
    } else if (in_class) {
      if (eat("=")) p->add(parse_assignment(false));
      else {
        auto u = make(NodeKind::Literal, cur());
        u->literal = LiteralKind::Undefined;
        p->add(std::move(u));
      }
      consume_semicolon();
    } else if (eat(":")) {
      p->add(parse_assignment(false));
    } else {
      if (p->computed) fail("expected ':' after computed key");
      p->shorthand = true;
      auto id = make_at(NodeKind::Identifier, *p);
      id->name = p->name;
      id->span.end = prev_end_;
      if (punct("=")) {
        auto d = make_at(NodeKind::DefaultValue, *p);
        next();
        d->add(std::move(id));
        d->add(parse_assignment(false));
        p->add(finish(std::move(d)));
      } else {
        p->add(std::move(id));
      }
    }
    if (key_expr) p->add(std::move(key_expr));
    return finish(std::move(p));
  }

  NodePtr parse_class() {
    auto n = make(NodeKind::ClassDef, cur());
    expect_word("class");
    if (cur().type == Tok::Ident && !word("extends")) n->name = next().text;
    if (eat_word("extends")) n->add(parse_lhs());
    else n->add(make(NodeKind::Empty, cur()));
    expect("{");
    while (!punct("}")) {
      if (cur().type == Tok::Eof) fail("unterminated class body");
      if (eat(";")) continue;
      n->add(parse_member(true));
    }
    next();
    return finish(std::move(n));
  }

  NodePtr parse_arrow(const Token& start, bool is_async) {
    auto fn = make(NodeKind::FunctionDef, start);
    fn->arrow = true;
    fn->is_async = is_async;
    if (punct("(")) {
      parse_params_into(*fn);
    } else {
      auto id = make(NodeKind::Identifier, cur());
      id->name = next().text;
      fn->add(std::move(id));
    }
    expect("=>");
    if (punct("{")) {
      fn->add(parse_block());
    } else {
      fn->expr_body = true;
      fn->add(parse_assignment(false));
    }
    return finish(std::move(fn));
  }

  // ---- expressions --------------------------------------------------------

  NodePtr parse_expression(bool no_in) {
    auto e = parse_assignment(no_in);
    if (!punct(",")) return e;
    auto seq = make_at(NodeKind::Sequence, *e);
    seq->add(std::move(e));
    while (eat(",")) seq->add(parse_assignment(no_in));
    return finish(std::move(seq));
  }

  NodePtr parse_assignment(bool no_in) {
    DepthGuard g(*this);
    if (word("yield") && !punct_at(at(1), "=") && !punct_at(at(1), "(") && !punct_at(at(1), ".")) {
      auto n = make(NodeKind::Unary, cur());
      n->name = "yield";
      next();
      eat("*");
      if (!ends_operand(cur()) && !cur().nl_before) n->add(parse_assignment(no_in));
      return finish(std::move(n));
    }
    auto lhs = parse_conditional(no_in);
    if (is_assign_op(cur())) {
      auto n = make_at(NodeKind::Assignment, *lhs);
      n->name = next().text;
      n->add(std::move(lhs));
      n->add(parse_assignment(no_in));
      return finish(std::move(n));
    }
    return lhs;
  }

  static bool ends_operand(const Token& t) {
    if (t.type == Tok::Eof) return true;
    if (t.type != Tok::Punct) return false;
    static constexpr std::array<std::string_view, 11> stop = {")", "]", "}", ",", ";", ":", "=", "=>", ".", "?", "?."};
    return std::find(stop.begin(), stop.end(), t.text) != stop.end();
  }

  NodePtr parse_conditional(bool no_in) {
    auto test = parse_binary(1, no_in);
    if (!punct("?")) return test;
    auto n = make_at(NodeKind::Conditional, *test);
    next();
    n->add(std::move(test));
    n->add(parse_assignment(false));
    expect(":");
    n->add(parse_assignment(no_in));
    return finish(std::move(n));
  }

  NodePtr parse_binary(int min_prec, bool no_in) {
    auto lhs = parse_unary();
    for (;;) {
      int p = binary_prec(cur(), no_in);
      if (p == 0 || p < min_prec) return lhs;
      std::string op = next().text;
      auto rhs = parse_binary(op == "**" ? p : p + 1, no_in);
      bool logical = op == "&&" || op == "||" || op == "??";
      auto n = make_at(logical ? NodeKind::Logical : NodeKind::Binary, *lhs);
      n->name = op;
      n->add(std::move(lhs));
      n->add(std::move(rhs));
      lhs = finish(std::move(n));
    }
  }

  NodePtr parse_unary() {
    DepthGuard g(*this);
    const Token& t = cur();
    if (t.type == Tok::Punct && (t.text == "!" || t.text == "~" || t.text == "+" || t.text == "-")) {
      auto n = make(NodeKind::Unary, t);
      n->name = next().text;
      n->add(parse_unary());
      return finish(std::move(n));
    }
    if (t.type == Tok::Punct && (t.text == "++" || t.text == "--")) {
      auto n = make(NodeKind::Update, t);
      n->name = next().text;
      n->prefix = true;
      n->add(parse_unary());
      return finish(std::move(n));
    }
    if (t.type == Tok::Ident && (t.text == "typeof" || t.text == "void" || t.text == "delete" ||
                                 (t.text == "await" && !ends_operand(at(1)) && !is_assign_op(at(1))))) {
      auto n = make(NodeKind::Unary, t);
      n->name = next().text;
      n->add(parse_unary());
      return finish(std::move(n));
    }
    auto e = parse_lhs();
    if ((punct("++") || punct("--")) && !cur().nl_before) {
      auto n = make_at(NodeKind::Update, *e);
      n->name = next().text;
      n->add(std::move(e));
      return finish(std::move(n));
    }
    return e;
  }

  NodePtr make_opaque_call(NodePtr call, std::string reason, bool writes) {
    auto op = make_at(NodeKind::Opaque, *call);
    op->span.end = call->span.end;
    op->name = std::move(reason);
    std::set<std::string> ids;
    for (std::size_t k = 1; k < call->kids.size(); ++k) {
      const Node& arg = *call->kids[k];
      collect_identifiers(arg, ids);
      if (arg.kind == NodeKind::Literal && arg.literal == LiteralKind::String)
        collect_string_identifiers(arg.value, ids);
      if (arg.kind == NodeKind::Template) collect_string_identifiers(arg.value, ids);
    }
    for (std::size_t k = 1; k < call->kids.size(); ++k) op->add(std::move(call->kids[k]));
    op->reads.assign(ids.begin(), ids.end());
    if (writes) op->writes = op->reads;
    return op;
  }

  void parse_arguments_into(Node& call) {
    expect("(");
    while (!punct(")")) {
      if (punct("...")) {
        auto s = make(NodeKind::Spread, cur());
        next();
        s->add(parse_assignment(false));
        call.add(finish(std::move(s)));
      } else {
        call.add(parse_assignment(false));
      }
      if (!punct(")")) expect(",");
    }
    next();
  }

  std::string parse_member_name() {
    if (punct("#")) {
      next();
      if (cur().type != Tok::Ident) fail("expected private name");
      return "#" + next().text;
    }
    if (cur().type != Tok::Ident) fail("expected property name");
    return next().text;
  }

  // Member/call suffixes. With allow_call false, stops before '(' (new callee).
  NodePtr parse_suffixes(NodePtr e, bool allow_call) {
    for (;;) {
      if (punct(".")) {
        next();
        auto n = make_at(NodeKind::MemberAccess, *e);
        n->name = parse_member_name();
        n->add(std::move(e));
        e = finish(std::move(n));
      } else if (punct("?.")) {
        if (!allow_call) return e;
        next();
        if (punct("(")) {
          auto c = make_at(NodeKind::Call, *e);
          c->optional = true;
          c->add(std::move(e));
          parse_arguments_into(*c);
          e = finish(std::move(c));
        } else if (eat("[")) {
          auto n = make_at(NodeKind::PropertyAccess, *e);
          n->optional = true;
          n->add(std::move(e));
          n->add(parse_expression(false));
          expect("]");
          e = finish(std::move(n));
        } else {
          auto n = make_at(NodeKind::MemberAccess, *e);
          n->optional = true;
          n->name = parse_member_name();
          n->add(std::move(e));
          e = finish(std::move(n));
        }
      } else if (punct("[")) {
        next();
        auto n = make_at(NodeKind::PropertyAccess, *e);
        n->add(std::move(e));
        n->add(parse_expression(false));
        expect("]");
        e = finish(std::move(n));
      } else if (punct("(") && allow_call) {
        auto c = make_at(NodeKind::Call, *e);
        bool is_eval = e->kind == NodeKind::Identifier && e->name == "eval";
        c->add(std::move(e));
        parse_arguments_into(*c);
        e = finish(std::move(c));
        if (is_eval) e = make_opaque_call(std::move(e), "eval", true);
      } else if (cur().type == Tok::Template) {
        auto c = make_at(NodeKind::Call, *e);
        c->add(std::move(e));
        c->add(parse_template());
        e = finish(std::move(c));
      } else {
        return e;
      }
    }
  }

  NodePtr parse_lhs() {
    NodePtr e = word("new") ? parse_new() : parse_primary();
    return parse_suffixes(std::move(e), true);
  }

  NodePtr parse_new() {
    const Token& start = cur();
    next();
    if (punct(".")) {
      next();
      auto id = make(NodeKind::Identifier, start);
      id->name = "new";
      auto n = make(NodeKind::MemberAccess, start);
      n->name = parse_member_name();
      n->add(std::move(id));
      return finish(std::move(n));
    }
    NodePtr callee = word("new") ? parse_new() : parse_primary();
    callee = parse_suffixes(std::move(callee), false);
    auto n = make(NodeKind::New, start);
    bool is_function = callee->kind == NodeKind::Identifier && callee->name == "Function";
    n->add(std::move(callee));
    if (punct("(")) parse_arguments_into(*n);
    n = finish(std::move(n));
    if (is_function) return make_opaque_call(std::move(n), "new Function", false);
    return n;
  }

  NodePtr parse_template() {
    const Token& t = next();
    auto n = make(NodeKind::Template, t);
    n->value = t.text;
    for (auto [b, e] : t.subst) {
      auto [line, col] = lines_.at(b);
      Lexer lx(src_, b, e, line, col);
      Parser sub(src_, lx.run(), lines_);
      sub.depth_ = depth_;
      n->add(sub.parse_standalone_expression());
    }
    return n;
  }

  NodePtr parse_primary() {
    DepthGuard g(*this);
    const Token& t = cur();
    switch (t.type) {
      case Tok::Num: {
        auto n = make(NodeKind::Literal, t);
        n->literal = LiteralKind::Number;
        n->value = next().text;
        return n;
      }
      case Tok::Str: {
        auto n = make(NodeKind::Literal, t);
        n->literal = LiteralKind::String;
        n->value = next().text;
        return n;
      }
      case Tok::Regex: {
        auto n = make(NodeKind::Literal, t);
        n->literal = LiteralKind::Regex;
        n->value = next().text;
        return n;
      }
      case Tok::Template:
        return parse_template();
      case Tok::Eof:
        fail("unexpected end of input");
      case Tok::Punct:
        return parse_punct_primary();
      case Tok::Ident:
        break;
    }
    const std::string& w = t.text;
    if (w == "async" && !at(1).nl_before) {
      if (at(1).type == Tok::Ident && at(1).text == "function") {
        next();
        return parse_function(true);
      }
      if (at(1).type == Tok::Ident && punct_at(at(2), "=>")) {
        next();
        return parse_arrow(t, true);
      }
      if (punct_at(at(1), "(") && paren_arrow_at(i_ + 1)) {
        next();
        return parse_arrow(t, true);
      }
    }
    if (punct_at(at(1), "=>") && !is_reserved(w)) return parse_arrow(t, false);
    if (w == "function") return parse_function(false);
    if (w == "class") return parse_class();
    if (w == "this" || w == "super") {
      auto n = make(w == "this" ? NodeKind::This : NodeKind::Super, t);
      next();
      return n;
    }
    if (w == "true" || w == "false" || w == "null" || w == "undefined") {
      auto n = make(NodeKind::Literal, t);
      n->literal = w == "null" ? LiteralKind::Null : w == "undefined" ? LiteralKind::Undefined : LiteralKind::Boolean;
      n->value = next().text;
      return n;
    }
    if (w == "import" && (punct_at(at(1), "(") || punct_at(at(1), "."))) {
      auto n = make(NodeKind::Identifier, t);
      n->name = next().text;
      return n;
    }
    if (is_reserved(w)) fail("unexpected keyword");
    auto n = make(NodeKind::Identifier, t);
    n->name = next().text;
    return n;
  }

  NodePtr parse_punct_primary() {
    const Token& t = cur();
    if (t.text == "(") {
      if (paren_arrow_at(i_)) return parse_arrow(t, false);
      next();
      auto e = parse_expression(false);
      expect(")");
      return e;
    }
    if (t.text == "[") {
      auto n = make(NodeKind::ArrayLiteral, t);
      next();
      while (!punct("]")) {
        if (cur().type == Tok::Eof) fail("unterminated array literal");
        if (punct(",")) {
          n->add(make(NodeKind::Empty, cur()));
          next();
          continue;
        }
        if (punct("...")) {
          auto s = make(NodeKind::Spread, cur());
          next();
          s->add(parse_assignment(false));
          n->add(finish(std::move(s)));
        } else {
          n->add(parse_assignment(false));
        }
        if (!punct("]")) expect(",");
      }
      next();
      return finish(std::move(n));
    }
    if (t.text == "{") return parse_object_literal();
    if (t.text == "#" && at(1).type == Tok::Ident) {
      auto n = make(NodeKind::Identifier, t);
      next();
      n->name = "#" + next().text;
      return finish(std::move(n));
    }
    fail("unexpected token");
  }

  std::string_view src_;
  std::vector<Token> toks_;
  const LineTable& lines_;
  std::size_t i_ = 0;
  std::uint32_t prev_end_ = 0;
  int depth_ = 0;
};

void dump_into(const Node& n, std::string& out) {
  out += '(';
  out += to_string(n.kind);
  if (n.kind == NodeKind::Literal) {
    out += ' ';
    if (n.literal == LiteralKind::String) {
      out += '"';
      for (char c : n.value) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
          out += "\\n";
          continue;
        }
        out += c;
      }
      out += '"';
    } else {
      out += n.value.empty() ? "undefined" : n.value;
    }
  } else if (n.kind == NodeKind::Template) {
    out += " `" + n.value + "`";
  } else if (!n.name.empty()) {
    out += ' ';
    out += n.name;
  }
  if (n.kind == NodeKind::Import || (n.kind == NodeKind::Export && !n.value.empty())) out += " '" + n.value + "'";
  if (n.kind == NodeKind::Export && n.is_default) out += " default";
  if (n.kind == NodeKind::FunctionDef && n.arrow) out += " =>";
  if (n.kind == NodeKind::Opaque) {
    out += " [";
    for (std::size_t k = 0; k < n.reads.size(); ++k) out += (k ? " " : "") + n.reads[k];
    out += "]";
  }
  for (const auto& k : n.kids) {
    out += ' ';
    dump_into(*k, out);
  }
  out += ')';
}

}  // namespace

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Program: return "Program";
    case NodeKind::FunctionDef: return "FunctionDef";
    case NodeKind::Call: return "Call";
    case NodeKind::New: return "New";
    case NodeKind::MemberAccess: return "MemberAccess";
    case NodeKind::PropertyAccess: return "PropertyAccess";
    case NodeKind::Assignment: return "Assignment";
    case NodeKind::ObjectLiteral: return "ObjectLiteral";
    case NodeKind::Property: return "Property";
    case NodeKind::ArrayLiteral: return "ArrayLiteral";
    case NodeKind::Identifier: return "Identifier";
    case NodeKind::Literal: return "Literal";
    case NodeKind::Template: return "Template";
    case NodeKind::Return: return "Return";
    case NodeKind::This: return "This";
    case NodeKind::Super: return "Super";
    case NodeKind::Binary: return "Binary";
    case NodeKind::Logical: return "Logical";
    case NodeKind::Unary: return "Unary";
    case NodeKind::Update: return "Update";
    case NodeKind::Conditional: return "Conditional";
    case NodeKind::Sequence: return "Sequence";
    case NodeKind::Spread: return "Spread";
    case NodeKind::DefaultValue: return "DefaultValue";
    case NodeKind::VarDecl: return "VarDecl";
    case NodeKind::Declarator: return "Declarator";
    case NodeKind::If: return "If";
    case NodeKind::For: return "For";
    case NodeKind::ForIn: return "ForIn";
    case NodeKind::ForOf: return "ForOf";
    case NodeKind::While: return "While";
    case NodeKind::DoWhile: return "DoWhile";
    case NodeKind::Block: return "Block";
    case NodeKind::ExprStmt: return "ExprStmt";
    case NodeKind::Try: return "Try";
    case NodeKind::Switch: return "Switch";
    case NodeKind::Case: return "Case";
    case NodeKind::Break: return "Break";
    case NodeKind::Continue: return "Continue";
    case NodeKind::Throw: return "Throw";
    case NodeKind::Empty: return "Empty";
    case NodeKind::ClassDef: return "ClassDef";
    case NodeKind::Import: return "Import";
    case NodeKind::Export: return "Export";
    case NodeKind::Opaque: return "Opaque";
  }
  return "?";
}

std::string dotted_name(const Node& n) {
  switch (n.kind) {
    case NodeKind::Identifier:
      return n.name;
    case NodeKind::This:
      return "this";
    case NodeKind::MemberAccess: {
      if (!n.kid(0)) return {};
      std::string base = dotted_name(*n.kid(0));
      return base.empty() ? std::string{} : base + "." + n.name;
    }
    default:
      return {};
  }
}

std::string dump(const Node& n) {
  std::string out;
  dump_into(n, out);
  return out;
}

ScriptAst parse_script(std::string_view src, std::string path) {
  std::uint32_t begin = 0;
  if (src.starts_with("#!")) {
    auto nl = src.find('\n');
    begin = nl == std::string_view::npos ? static_cast<std::uint32_t>(src.size()) : static_cast<std::uint32_t>(nl);
  }
  LineTable lines(src);
  auto [line, col] = lines.at(begin);
  Lexer lx(src, begin, static_cast<std::uint32_t>(src.size()), line, col);
  Parser p(src, lx.run(), lines);
  return ScriptAst{std::move(path), p.parse_program()};
}

}  // namespace spo::js
