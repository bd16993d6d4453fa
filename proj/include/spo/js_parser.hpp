#pragma once

#include <string>
#include <string_view>

#include "spo/js_ast.hpp"

namespace spo::js {

/// Parses logic-layer script source into an AST.
///
/// Covers the ECMAScript subset sub-app frameworks use in practice:
/// function declarations/expressions, arrows, classes, var/let/const with
/// destructuring, object/array literals, template strings, spread, optional
/// chaining, modules (require/import/export) and all statement forms.
/// `eval(...)`, `new Function(...)` and `with` become Opaque nodes carrying
/// the identifiers they read and may write. Throws ParseError on the first
/// syntax error.
ScriptAst parse_script(std::string_view src, std::string path = {});

}  // namespace spo::js
