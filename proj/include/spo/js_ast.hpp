#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "spo/common.hpp"

namespace spo::js {

enum class NodeKind {
  Program,
  FunctionDef,
  Call,
  New,
  MemberAccess,    // a.b, a?.b
  PropertyAccess,  // a[b]
  Assignment,
  ObjectLiteral,
  Property,
  ArrayLiteral,
  Identifier,
  Literal,
  Template,
  Return,
  This,
  Super,
  Binary,
  Logical,
  Unary,
  Update,
  Conditional,
  Sequence,
  Spread,
  DefaultValue,  // pattern target with a default: `a = 1` in params/destructuring
  VarDecl,
  Declarator,
  If,
  For,
  ForIn,
  ForOf,
  While,
  DoWhile,
  Block,
  ExprStmt,
  Try,
  Switch,
  Case,
  Break,
  Continue,
  Throw,
  Empty,
  ClassDef,
  Import,
  Export,
  Opaque,
};

std::string_view to_string(NodeKind k);

enum class LiteralKind { String, Number, Boolean, Null, Undefined, Regex };

/// One AST node. Child layout per kind:
///
///   Program, Block, Sequence, ArrayLiteral, ObjectLiteral: kids = elements
///   FunctionDef:  kids = params..., body (Block, or an expression when expr_body)
///   Call, New:    kids[0] = callee, kids[1..] = arguments
///   MemberAccess: kids[0] = object, name = property
///   PropertyAccess: kids[0] = object, kids[1] = index
///   Assignment:   name = operator, kids = {target, value}
///   Property:     name = key (empty when computed and unresolvable),
///                 kids[0] = value, kids[1] = key expression when computed
///   Identifier:   name;  Literal: value + literal;  Template: value = cooked
///                 text without substitutions, kids = substitutions
///   Binary, Logical: name = operator, kids = {lhs, rhs}
///   Unary, Update: name = operator, kids[0] = operand
///   Conditional:  kids = {test, consequent, alternate}
///   Spread, Return, Throw, ExprStmt: kids[0] (Return may be empty)
///   DefaultValue: kids = {target, default}
///   VarDecl:      name = var/let/const, kids = Declarators
///   Declarator:   kids = {target, init?}
///   If:           kids = {test, then, else?}
///   For:          kids = {init, test, update, body} (Empty for absent parts)
///   ForIn/ForOf:  kids = {left, right, body}
///   While:        kids = {test, body};  DoWhile: kids = {body, test}
///   Try:          kids = {block, catch param|Empty, catch body|Empty, finally|Empty}
///   Switch:       kids = {discriminant, Case...};  Case: kids = {test|Empty, stmts...}
///   ClassDef:     name, kids[0] = superclass|Empty, kids[1..] = Property members
///   Import:       value = module, kids = Property (name = imported, kids[0] = local Identifier)
///   Export:       is_default; kids[0] = declaration/expression, or Property
///                 specifiers (name = exported, kids[0] = local); value = re-export module
///   Opaque:       name = reason, kids = parsed sub-parts, reads/writes = identifiers
struct Node {
  NodeKind kind = NodeKind::Empty;
  Span span;
  std::string name;
  std::string value;
  LiteralKind literal = LiteralKind::Undefined;

  bool arrow = false;      // FunctionDef
  bool expr_body = false;  // FunctionDef with a concise arrow body
  bool is_async = false;   // FunctionDef
  bool computed = false;   // Property with [key]
  bool shorthand = false;  // Property `{a}`
  bool method = false;     // Property whose value is a method definition
  bool prefix = false;     // Update
  bool optional = false;   // ?. chains
  bool is_default = false; // Export default
  bool is_static = false;  // class member

  std::vector<std::unique_ptr<Node>> kids;
  std::vector<std::string> reads;   // Opaque
  std::vector<std::string> writes;  // Opaque

  Node() = default;
  Node(NodeKind k, Span s) : kind(k), span(s) {}

  Node* kid(std::size_t i) const { return i < kids.size() ? kids[i].get() : nullptr; }
  Node* add(std::unique_ptr<Node> n) {
    kids.push_back(std::move(n));
    return kids.back().get();
  }

  /// For FunctionDef: parameter nodes and body.
  std::size_t param_count() const { return kids.empty() ? 0 : kids.size() - 1; }
  Node* body() const { return kids.empty() ? nullptr : kids.back().get(); }
};

using NodePtr = std::unique_ptr<Node>;

/// Parsed script file.
struct ScriptAst {
  std::string path;
  NodePtr root;  // Program
};

/// Calls `fn` on every node in pre-order. Returning false from `fn` skips
/// the node's children.
template <typename Fn>
void walk(const Node& n, Fn&& fn) {
  if (!fn(n)) return;
  for (const auto& k : n.kids)
    if (k) walk(*k, fn);
}

/// Dotted text for Identifier/MemberAccess chains ("wx.getLocation",
/// "this.setData"); empty for anything else.
std::string dotted_name(const Node& n);

/// Compact S-expression rendering, used by tests and debug dumps.
std::string dump(const Node& n);

}  // namespace spo::js
