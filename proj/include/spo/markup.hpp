#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spo/common.hpp"

namespace spo {

struct MarkupAttr {
  std::string name;  // verbatim
  std::string value;
  friend bool operator==(const MarkupAttr&, const MarkupAttr&) = default;
};

/// Element or text node. Nodes live in MarkupDoc::nodes and refer to each
/// other by index; index 0 is the synthetic document root.
struct MarkupNode {
  enum class Kind { Element, Text };

  Kind kind = Kind::Element;
  std::string tag;   // elements
  std::vector<MarkupAttr> attrs;
  std::string text;  // text nodes, entities decoded
  Span span;
  int parent = -1;
  std::vector<int> children;

  bool is_element() const { return kind == Kind::Element; }
  const std::string* attr(std::string_view name) const;

  friend bool operator==(const MarkupNode&, const MarkupNode&) = default;
};

struct MarkupDoc {
  std::vector<MarkupNode> nodes{MarkupNode{}};
  std::vector<std::string> repairs;  // lenient fixes applied while parsing

  const MarkupNode& root() const { return nodes.front(); }
  const MarkupNode& at(int i) const { return nodes[static_cast<std::size_t>(i)]; }

  /// Concatenated text below node `i` (text nodes joined by one space).
  std::string text_content(int i) const;
  /// Element indices in document order.
  std::vector<int> elements() const;

  friend bool operator==(const MarkupDoc&, const MarkupDoc&) = default;
};

/// Lenient XML-style parse of a render document.
///
/// Unclosed elements are closed at the first closing tag of an ancestor or
/// at end of input; stray closing tags are ignored. A void-style element
/// (input, image, ...) written without "/>" closes immediately unless its
/// closing tag follows. Every such fix is logged in `repairs`. Throws
/// ParseError only for input that cannot be repaired locally: an
/// unterminated comment, quoted attribute value or tag.
MarkupDoc parse_markup(std::string_view src);

/// Text with `{{ ... }}` interpolations removed.
std::string strip_mustache(std::string_view s);

}  // namespace spo
