#include <doctest.h>

#include "spo/markup.hpp"

using namespace spo;

namespace {

std::string shape(const MarkupDoc& doc, int i = 0) {
  const auto& n = doc.at(i);
  std::string out;
  if (i != 0) {
    if (!n.is_element()) return "'" + n.text + "'";
    out = n.tag;
  }
  if (n.children.empty()) return out;
  out += "(";
  for (std::size_t k = 0; k < n.children.size(); ++k) {
    if (k) out += " ";
    out += shape(doc, n.children[k]);
  }
  return out + ")";
}

}  // namespace

TEST_CASE("markup: nested elements and attributes") {
  auto doc = parse_markup(R"(<view class="a"><text>Hi &amp; bye</text><input placeholder='Name' bindinput="onName"/></view>)");
  CHECK(shape(doc) == "(view(text('Hi & bye') input))");
  CHECK(doc.repairs.empty());
  auto els = doc.elements();
  REQUIRE(els.size() == 3);
  const auto& input = doc.at(els[2]);
  REQUIRE(input.attr("placeholder"));
  CHECK(*input.attr("placeholder") == "Name");
  CHECK(*input.attr("bindinput") == "onName");
  CHECK(input.attr("missing") == nullptr);
  CHECK(doc.at(input.parent).tag == "view");
}

TEST_CASE("markup: void-style tags close themselves with a repair") {
  auto doc = parse_markup("<view><input></view>");
  CHECK(shape(doc) == "(view(input))");
  CHECK(doc.repairs.size() == 1);

  auto closed = parse_markup("<view><input></input></view>");
  CHECK(shape(closed) == "(view(input))");
  CHECK(closed.repairs.empty());
}

TEST_CASE("markup: unclosed and stray tags are repaired") {
  auto doc = parse_markup("<view><text>a</view></form><button>b");
  CHECK(shape(doc) == "(view(text('a')) button('b'))");
  CHECK(doc.repairs.size() == 3);
}

TEST_CASE("markup: script bodies are skipped") {
  auto doc = parse_markup("<wxs module=\"m\">var a = 1 < 2 && <b>;</wxs><view>x</view>");
  CHECK(shape(doc) == "(wxs view('x'))");
  CHECK(doc.text_content(0) == "x");
}

TEST_CASE("markup: comments, declarations and boolean attributes") {
  auto doc = parse_markup("<?xml version=\"1.0\"?><!-- <input> --><switch checked disabled/>");
  auto els = doc.elements();
  REQUIRE(els.size() == 1);
  CHECK(doc.at(els[0]).tag == "switch");
  REQUIRE(doc.at(els[0]).attr("checked"));
  CHECK(doc.at(els[0]).attr("checked")->empty());
}

TEST_CASE("markup: text content joins text nodes") {
  auto doc = parse_markup("<view>Your <text>phone</text> number</view>");
  CHECK(doc.text_content(doc.elements()[0]) == "Your phone number");
}

TEST_CASE("markup: unrecoverable input raises ParseError") {
  CHECK_THROWS_AS(parse_markup("<view><!-- never closed"), ParseError);
  CHECK_THROWS_AS(parse_markup("<view class=\"abc>"), ParseError);
  CHECK_THROWS_AS(parse_markup("<view"), ParseError);
  try {
    parse_markup("<view>\n\n<input value='x");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("markup: mustache stripping") {
  CHECK(strip_mustache("Hello {{name}}!") == "Hello  !");
  CHECK(strip_mustache("a{{b}}c") == "a c");
  CHECK(strip_mustache("no braces") == "no braces");
  CHECK(strip_mustache("open {{ only") == "open {{ only");
}

TEST_CASE("markup: empty and text-only input") {
  CHECK(parse_markup("").nodes.size() == 1);
  auto doc = parse_markup("just text");
  CHECK(shape(doc) == "('just text')");
}
