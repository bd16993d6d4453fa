#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "spo/common.hpp"
#include "spo/js_ast.hpp"
#include "spo/package.hpp"
#include "spo/taxonomy.hpp"

namespace spo {

/// Every script file of a package, parsed. Files that fail to parse are
/// listed in `errors` and left out of `files`.
struct ParsedScripts {
  std::map<std::string, js::ScriptAst> files;  // relative path -> AST
  std::map<std::string, std::string> errors;   // relative path -> message
};

ParsedScripts parse_package_scripts(const SubAppPackage& pkg);

struct FunctionInfo {
  enum class Kind { Entry, ModuleInit, Function };

  int id = 0;
  Kind kind = Kind::Function;
  std::string file;
  std::string owner;  // "app", a page route, a component path, or "" for helpers
  std::string name;   // declared or inferred name; "anonymous#k" otherwise
  const js::Node* node = nullptr;  // FunctionDef, Program for module init, null for entry
  int parent = -1;                 // lexically enclosing function

  /// "file::name", or "<main>" for the entry.
  std::string label() const;
};

/// A variable: declared in function `scope` (module init for file-level
/// names) or global when scope is -1.
struct BindingKey {
  int scope = -1;
  std::string name;
  friend auto operator<=>(const BindingKey&, const BindingKey&) = default;
};

/// One value stored into a binding: an initializer, an assignment, a
/// destructured part of one (`member` path), or an import.
struct AssignedValue {
  const js::Node* value = nullptr;
  int fn = 0;                       // function whose scope evaluates `value`
  std::vector<std::string> member;  // destructuring path below `value`
  std::string module;               // import: resolved file
  std::string export_name;          // import: imported name, "*" for namespace
};

/// What an expression may denote, as far as call resolution cares.
struct Resolved {
  std::set<int> functions;
  std::vector<std::pair<const js::Node*, int>> objects;  // object literal, evaluating function
  std::set<std::string> modules;                          // module namespaces by file
  std::set<std::string> owners;                           // registration instances (this, getApp())
  std::set<std::string> wx_types;                         // typed objects from factory subAPIs
  bool wx = false;                                        // the subAPI namespace itself

  bool empty() const {
    return functions.empty() && objects.empty() && modules.empty() && owners.empty() && wx_types.empty() && !wx;
  }
  void merge(const Resolved& o);
};

/// Functions, scopes, bindings and module exports of one sub-app's scripts.
class ScriptIndex {
 public:
  ScriptIndex(const ParsedScripts& scripts, const SubAppPackage& pkg, const Taxonomy* tax = nullptr);

  const std::vector<FunctionInfo>& functions() const { return functions_; }
  const FunctionInfo& function(int id) const { return functions_[static_cast<std::size_t>(id)]; }
  /// Id of a FunctionDef node, or -1.
  int function_of(const js::Node* def) const;
  int module_init(const std::string& file) const;
  /// Innermost function containing the node (module init for top level).
  int enclosing(const js::Node* n) const;
  /// Calls and `new` expressions lexically inside function `fn` (not nested functions).
  const std::vector<const js::Node*>& call_sites(int fn) const;

  BindingKey lookup(int fn, const std::string& name) const;
  const std::vector<AssignedValue>& assigned(const BindingKey& b) const;
  bool is_parameter(const BindingKey& b) const;

  Resolved resolve(const js::Node& expr, int fn) const;
  Resolved member(const Resolved& base, const std::string& prop) const;
  /// File a literal require/import specifier refers to, or "".
  std::string resolve_module(const std::string& from_file, const std::string& spec) const;
  /// Files required or imported by `file`, with the requiring node.
  const std::vector<std::pair<std::string, const js::Node*>>& imports(const std::string& file) const;

  /// Values returned by `return` statements of a function.
  const std::vector<std::pair<const js::Node*, int>>& returns(int fn) const;

  /// Methods reachable through `this` of a registration instance.
  void add_owner_method(const std::string& owner, const std::string& name, int fn);
  const std::map<std::string, std::set<int>>& owner_methods(const std::string& owner) const;

  /// Binds function- and object-valued call arguments to the parameters of
  /// resolved callees, so callbacks handed to helpers resolve inside them.
  /// Idempotent.
  void bind_call_arguments();

  const std::string& owner_of_file(const std::string& file) const;
  const ParsedScripts& scripts() const { return scripts_; }

 private:
  int add_function(const js::Node& def, int parent, const std::string& file, const std::string& hint);
  void collect(const js::Node& n, int fn, const std::string& file, bool statement, const std::string& hint = {},
               bool self_bind = true);
  void declare_pattern(const js::Node& target, int fn, const js::Node* value, int value_fn,
                       std::vector<std::string> path, bool is_param, const std::string& file);
  void record(const js::Node& n, int fn, const std::string& file);
  void record_assignment(const js::Node& target, const js::Node& value, int fn, const std::string& file);
  Resolved resolve_binding(const BindingKey& b, int depth) const;
  Resolved resolve_at(const js::Node& expr, int fn, int depth) const;
  Resolved member_at(const Resolved& base, const std::string& prop, int depth) const;
  Resolved resolve_assigned(const AssignedValue& a, int depth) const;
  Resolved module_export(const std::string& file, const std::string& name, int depth) const;

  const ParsedScripts& scripts_;
  const SubAppPackage& pkg_;
  const Taxonomy* tax_;
  std::vector<FunctionInfo> functions_;
  std::map<const js::Node*, int> fn_of_node_;
  std::map<const js::Node*, int> enclosing_;
  std::map<std::string, int> module_init_;
  std::map<std::string, std::string> file_owner_;
  std::vector<std::set<std::string>> declared_;  // per function
  std::vector<std::set<std::string>> params_;    // per function
  std::map<BindingKey, std::vector<AssignedValue>> assigned_;
  std::vector<std::vector<const js::Node*>> calls_;
  std::map<std::string, std::map<std::string, std::vector<AssignedValue>>> exports_;
  std::map<std::string, std::vector<std::pair<std::string, const js::Node*>>> imports_;
  std::map<std::string, std::map<std::string, std::set<int>>> owner_methods_;
  std::map<std::string, std::map<std::string, std::vector<AssignedValue>>> owner_props_;
  std::vector<std::vector<std::pair<const js::Node*, int>>> returns_;  // per function
  std::map<std::string, int> anon_counter_;
};

/// Registration of App(...), Page(...) or Component(...).
struct RegistrationModel {
  std::string kind;   // App, Page, Component
  std::string owner;  // "app", route or component path
  std::string file;
  std::map<std::string, int> lifecycle_fns;  // name -> function id
  std::map<std::string, int> handlers;       // name -> function id
  std::set<std::string> data_fields;
  /// Data fields initialised with arrays of strings (option lists).
  std::map<std::string, std::vector<std::string>> data_strings;
  bool registered = false;
};

struct AppModel : RegistrationModel {};
struct PageModel : RegistrationModel {
  std::string route;
};
struct ComponentModel : RegistrationModel {
  std::string path;
};

struct ScriptModels {
  AppModel app;
  std::vector<PageModel> pages;            // one per loaded page with a parsed script
  std::vector<ComponentModel> components;  // registered by Component(...) outside pages
  Diagnostics warnings;

  const PageModel* page(const std::string& route) const;
  const RegistrationModel* owner(const std::string& owner) const;
};

/// Reads registrations and records instance methods on the index.
ScriptModels extract_models(ScriptIndex& index, const SubAppPackage& pkg);

enum class EdgeTag { Direct, Lifecycle, Binding, Callback, Listener, Argument, Module };

std::string_view to_string(EdgeTag t);

struct CallEdge {
  int caller = 0;
  int callee = 0;
  Span site;
  const js::Node* call = nullptr;  // null for implicit edges
  EdgeTag tag = EdgeTag::Direct;
  std::string detail;  // callback property, binding attribute, lifecycle name

  friend bool operator==(const CallEdge&, const CallEdge&) = default;
};

/// Handler name bound to an event attribute in a render document.
struct HandlerBinding {
  std::string owner;  // page route or component path
  std::string attr;   // attribute as written
  std::string handler;
  Span span;
};

struct UnresolvedCall {
  int caller = 0;
  std::string callee;  // source text of the callee, shortened
  Span site;
};

class CallGraph {
 public:
  std::vector<FunctionInfo> nodes;
  std::vector<CallEdge> edges;
  std::vector<UnresolvedCall> unresolved;
  std::vector<HandlerBinding> unresolved_bindings;
  int entry = 0;

  /// Functions reachable from the entry node.
  std::set<int> reachable() const;
  std::vector<const CallEdge*> out_edges(int fn) const;
  /// Edges leaving a call expression.
  std::vector<const CallEdge*> edges_at(const js::Node* call) const;
  /// Graphviz rendering: node list and edge list.
  std::string to_dot() const;

 private:
  friend CallGraph build_call_graph(const ScriptIndex&, const ScriptModels&, const std::vector<HandlerBinding>&,
                                    const Taxonomy&);
  std::map<const js::Node*, std::vector<std::size_t>> by_call_;
  std::map<int, std::vector<std::size_t>> by_caller_;
};

/// True when `call` invokes a subAPI: wx.x(...) or a method of a typed
/// object created by a factory subAPI. `name` receives "x" or "Type.x".
bool subapi_call(const ScriptIndex& index, const js::Node& call, int fn, const Taxonomy& tax, std::string& name);

CallGraph build_call_graph(const ScriptIndex& index, const ScriptModels& models,
                           const std::vector<HandlerBinding>& bindings, const Taxonomy& tax);

}  // namespace spo
