#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "spo/common.hpp"
#include "spo/markup.hpp"
#include "spo/package.hpp"
#include "spo/script.hpp"
#include "spo/taxonomy.hpp"

namespace spo {

enum class NativeKind { Input, Process };

/// Native component type of `tag`, if it is one of the input/process
/// components. `form` counts as a process component.
const NativeKind* native_kind(std::string_view tag);

/// Binding attributes that deliver user input for a native kind, in
/// normalized form (bindinput, bindconfirm / bindchange, bindsubmit, ...).
const std::set<std::string>& binding_patterns(NativeKind kind);

/// "bind:input", "catchinput", "capture-bind:input" -> "bindinput"; "" for
/// attributes that are not event bindings.
std::string normalize_binding(std::string_view attr);

/// Custom component that transitively wraps input/process native components.
struct ComponentDef {
  std::string name;  // package path without extension
  int level = 1;
  std::set<std::string> depends_on;      // UIP custom components used directly
  std::set<std::string> input_bindings;  // normalized, inherited from the natives below
  std::set<std::string> natives;         // native input/process tags reached

  friend bool operator==(const ComponentDef&, const ComponentDef&) = default;
};

struct ComponentResolution {
  std::vector<ComponentDef> components;  // by (level, name)
  /// Owner (page route or component path) -> markup tag -> component path.
  std::map<std::string, std::map<std::string, std::string>> tag_maps;
  /// Every custom component found, UIP or not.
  std::set<std::string> all;
  Diagnostics warnings;

  const ComponentDef* find(std::string_view name) const;
};

/// Reads usingComponents declarations (app-wide, per page and per component),
/// parses component markup and levels the UIP components bottom-up.
/// Components on a dependency cycle are dropped with a warning; components
/// that reach no input/process native component are not listed.
ComponentResolution resolve_components(const SubAppPackage& pkg);

struct UipSource {
  std::string page_route;  // owner of the markup: page route or component path
  Span span;
  ItemSet items;  // user-input items
  std::string handler_name;
  std::string binding_attr;  // as written
  std::string tag;
  std::string label_source;  // attribute, sibling, label, heading, content, options, component
  std::string label_text;
  std::string form_handler;  // submit handler of the enclosing form, if any

  friend bool operator==(const UipSource&, const UipSource&) = default;
};

/// Extraction over one markup document. `data_strings` supplies option lists
/// for `range="{{field}}"`; `intrinsic` holds items found inside custom
/// components, used when the page gives an element no label of its own.
struct UipContext {
  const ComponentResolution* components = nullptr;
  const KeywordLexicon* lexicon = nullptr;
  const std::map<std::string, std::vector<std::string>>* data_strings = nullptr;
  const std::map<std::string, ItemSet>* intrinsic = nullptr;
};

std::vector<UipSource> extract_uip(const std::string& owner, const MarkupDoc& doc, const UipContext& ctx,
                                   Diagnostics* warnings = nullptr);

std::vector<UipSource> extract_uip(const Page& page, const ComponentResolution& comps, const KeywordLexicon& lexicon,
                                   const RegistrationModel* model = nullptr, Diagnostics* warnings = nullptr);

/// Every event binding with a literal handler name.
std::vector<HandlerBinding> extract_bindings(const std::string& owner, const MarkupDoc& doc);

struct RenderAnalysis {
  ComponentResolution components;
  std::vector<UipSource> uips;          // components first, then pages
  std::vector<HandlerBinding> bindings;  // pages and components
  Diagnostics warnings;
};

/// Render-layer pass over a whole package. Pages whose markup cannot be
/// parsed are left out with a warning.
RenderAnalysis analyze_render(const SubAppPackage& pkg, const ScriptModels* models, const KeywordLexicon& lexicon);

}  // namespace spo
