#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "spo/common.hpp"
#include "spo/render.hpp"
#include "spo/script.hpp"
#include "spo/taxonomy.hpp"

namespace spo {

enum class SourceKind { SubApiCallback, SubApiReturn, UipHandlerParam, FormSubmitEvent };

std::string_view to_string(SourceKind k);

struct SourcePoint {
  int id = 0;
  SourceKind kind = SourceKind::SubApiCallback;
  ItemSet items;
  int fn = 0;                      // function holding the tainted binding or call
  std::vector<std::string> bindings;  // tainted parameter names; empty for returns
  Span span;
  std::string file;
  std::string api;    // subAPI name, or handler name for UI sources
  std::string owner;  // page route / component path for UI sources
  const js::Node* call = nullptr;  // subAPI call for returns and promise results

  friend bool operator==(const SourcePoint&, const SourcePoint&) = default;
};

/// Where taint can rest.
struct TaintLoc {
  enum class Kind { Var, Ret, PageData, OwnerProp, CallRet };
  Kind kind = Kind::Var;
  int fn = -1;           // Var: declaring scope (-1 global); Ret: function
  std::string name;      // Var: name; PageData: field ("*" for whole-object writes); OwnerProp: property
  std::string owner;     // PageData / OwnerProp
  const js::Node* node = nullptr;  // CallRet: the `new Promise(...)` expression

  friend auto operator<=>(const TaintLoc&, const TaintLoc&) = default;
  friend bool operator==(const TaintLoc&, const TaintLoc&) = default;
};

/// A taint label: a source (fn == -1, index = source id) or the symbolic
/// value of parameter `index` of function `fn`, resolved through call sites
/// when flows are reported.
using TaintLabel = std::pair<int, int>;
using LabelSet = std::set<TaintLabel>;

struct TaintState {
  std::vector<SourcePoint> sources;
  std::map<TaintLoc, LabelSet> locs;
  /// (callee, parameter) -> call site -> (caller, labels of the argument)
  std::map<std::pair<int, int>, std::map<const js::Node*, std::pair<int, LabelSet>>> param_in;
  int iterations = 0;

  /// Sources a label set stands for, following parameter labels back
  /// through every call site.
  std::set<int> expand(const LabelSet& labels) const;
  ItemSet items(const LabelSet& labels) const;
  ItemSet items_at(const TaintLoc& loc) const;
  ItemSet binding_items(int scope, const std::string& name) const;
  ItemSet page_data_items(const std::string& owner, const std::string& field) const;
};

struct TaintFlow {
  SourcePoint source;
  std::string sink;  // sink subAPI name
  Span sink_span;
  int sink_fn = 0;
  std::string sink_file;
  ItemSet items;
  std::vector<std::pair<int, Span>> path;  // (function, span) hops from source to sink
  std::string url;  // literal request URL when statically known

  friend bool operator==(const TaintFlow&, const TaintFlow&) = default;
};

/// Self-contained description of a flow, safe to keep after the analysed
/// sources are gone.
struct FlowRecord {
  std::string source_kind;
  std::string source_api;
  SourceLocation source;
  std::string sink;
  SourceLocation sink_at;
  ItemSet items;
  std::string url;
  std::vector<SourceLocation> path;

  friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
  friend auto operator<=>(const FlowRecord&, const FlowRecord&) = default;
};

FlowRecord describe(const TaintFlow& flow, const ScriptIndex& index);

/// Source points: success/complete callbacks and listeners of mapped
/// subAPIs, values of synchronous or promise-returning subAPI calls, the
/// event parameter of UI handlers and of form submit handlers.
std::vector<SourcePoint> mark_sources(const CallGraph& graph, const ScriptIndex& index, const ScriptModels& models,
                                      const std::vector<UipSource>& uips, const Taxonomy& tax);

/// Propagates source labels over every function to a fixpoint.
TaintState propagate(const CallGraph& graph, const ScriptIndex& index, const std::vector<SourcePoint>& sources,
                     const Taxonomy& tax);

/// One flow per (source, sink call) whose payload argument carries the
/// source's taint.
std::vector<TaintFlow> find_flows(const TaintState& state, const CallGraph& graph, const ScriptIndex& index,
                                  const Taxonomy& tax);

/// S_collect: union of flow items.
ItemSet collect_set(const std::vector<TaintFlow>& flows);

}  // namespace spo
