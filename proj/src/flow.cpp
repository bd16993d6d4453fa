#include "spo/flow.hpp"

#include <algorithm>
#include <deque>

namespace spo {

using js::Node;
using js::NodeKind;

std::string_view to_string(SourceKind k) {
  switch (k) {
    case SourceKind::SubApiCallback: return "subapi_callback";
    case SourceKind::SubApiReturn: return "subapi_return";
    case SourceKind::UipHandlerParam: return "uip_handler_param";
    case SourceKind::FormSubmitEvent: return "form_submit_event";
  }
  return "?";
}

namespace {

void pattern_names(const Node& p, std::vector<std::string>& out) {
  switch (p.kind) {
    case NodeKind::Identifier: out.push_back(p.name); break;
    case NodeKind::DefaultValue:
    case NodeKind::Spread:
      if (p.kid(0)) pattern_names(*p.kid(0), out);
      break;
    case NodeKind::ObjectLiteral:
      for (const auto& k : p.kids) {
        if (k->kind == NodeKind::Property && k->kid(0)) pattern_names(*k->kid(0), out);
        else if (k->kind == NodeKind::Spread) pattern_names(*k, out);
      }
      break;
    case NodeKind::ArrayLiteral:
      for (const auto& k : p.kids) pattern_names(*k, out);
      break;
    default: break;
  }
}

std::vector<std::string> first_param_names(const FunctionInfo& f) {
  std::vector<std::string> out;
  if (f.node && f.node->kind == NodeKind::FunctionDef && f.node->param_count() > 0) pattern_names(*f.node->kid(0), out);
  return out;
}

Span first_param_span(const FunctionInfo& f) {
  if (f.node && f.node->kind == NodeKind::FunctionDef && f.node->param_count() > 0) return f.node->kid(0)->span;
  return f.node ? f.node->span : Span{};
}

bool is_string_literal(const Node* n) {
  return n && n->kind == NodeKind::Literal && n->literal == js::LiteralKind::String;
}

std::string data_field(const std::string& key) { return key.substr(0, key.find_first_of(".[")); }

void merge(LabelSet& into, const LabelSet& from) { into.insert(from.begin(), from.end()); }

// `resolve` parameters of `new Promise((resolve) => ...)` executors
std::map<BindingKey, const Node*> promise_resolvers(const ScriptIndex& index) {
  std::map<BindingKey, const Node*> out;
  for (const auto& f : index.functions()) {
    for (const Node* call : index.call_sites(f.id)) {
      if (call->kind != NodeKind::New || !call->kid(0) || call->kid(0)->kind != NodeKind::Identifier ||
          call->kid(0)->name != "Promise" || !call->kid(1))
        continue;
      for (int ex : index.resolve(*call->kid(1), f.id).functions) {
        const auto& info = index.function(ex);
        if (info.node && info.node->param_count() > 0 && info.node->kid(0)->kind == NodeKind::Identifier)
          out[{ex, info.node->kid(0)->name}] = call;
      }
    }
  }
  return out;
}

const std::set<std::string> kComparisons = {"==", "===", "!=", "!==", "<", ">", "<=", ">=", "instanceof", "in"};
const std::set<std::string> kMutators = {"push", "unshift", "splice", "set", "append"};

class Engine {
 public:
  Engine(TaintState& st, const CallGraph& g, const ScriptIndex& idx, const Taxonomy& tax)
      : st_(st), graph_(g), index_(idx), tax_(tax), reachable_(g.reachable()) {}

  void seed() {
    for (const auto& f : index_.functions()) {
      if (f.kind != FunctionInfo::Kind::Function || !f.node) continue;
      for (std::size_t i = 0; i < f.node->param_count(); ++i) {
        std::vector<std::string> names;
        pattern_names(*f.node->kid(i), names);
        for (const auto& n : names) add({TaintLoc::Kind::Var, f.id, n, {}, nullptr}, {{f.id, static_cast<int>(i)}});
      }
    }
    for (const auto& s : st_.sources) {
      for (const auto& b : s.bindings) add({TaintLoc::Kind::Var, s.fn, b, {}, nullptr}, {{-1, s.id}});
      if (s.call) call_sources_[s.call].push_back(s.id);
    }
    resolvers_ = promise_resolvers(index_);
  }

  bool run_once() {
    changed_ = false;
    for (const auto& f : index_.functions()) {
      if (f.kind == FunctionInfo::Kind::Entry || !reachable_.count(f.id) || !f.node) continue;
      if (f.kind == FunctionInfo::Kind::ModuleInit) {
        eval(*f.node, f.id);
        continue;
      }
      const Node* body = f.node->body();
      if (!body) continue;
      for (std::size_t i = 0; i < f.node->param_count(); ++i)
        if (f.node->kid(i)->kind == NodeKind::DefaultValue) bind_pattern(*f.node->kid(i), nullptr, {}, f.id);
      if (f.node->expr_body) add({TaintLoc::Kind::Ret, f.id, {}, {}, nullptr}, eval(*body, f.id));
      else eval(*body, f.id);
    }
    return changed_;
  }

  bool reachable(int fn) const { return reachable_.count(fn) > 0; }

  LabelSet eval(const Node& n, int fn) {
    switch (n.kind) {
      case NodeKind::FunctionDef:
      case NodeKind::Literal:
      case NodeKind::This:
      case NodeKind::Super:
        return {};
      case NodeKind::Identifier:
        return get(var(fn, n.name));
      case NodeKind::Template:
      case NodeKind::ObjectLiteral:
      case NodeKind::ArrayLiteral:
      case NodeKind::Spread:
      case NodeKind::Property:
      case NodeKind::Logical: {
        LabelSet out;
        for (const auto& k : n.kids)
          if (k && !(n.kind == NodeKind::Property && k.get() != n.kid(0))) merge(out, eval(*k, fn));
        return out;
      }
      case NodeKind::Binary: {
        LabelSet l = eval(*n.kid(0), fn);
        LabelSet r = eval(*n.kid(1), fn);
        if (kComparisons.count(n.name)) return {};
        merge(l, r);
        return l;
      }
      case NodeKind::Unary: {
        LabelSet v = eval(*n.kid(0), fn);
        if (n.name == "typeof" || n.name == "!" || n.name == "delete" || n.name == "void") return {};
        return v;
      }
      case NodeKind::Update:
        return eval(*n.kid(0), fn);
      case NodeKind::Conditional: {
        eval(*n.kid(0), fn);
        LabelSet out = eval(*n.kid(1), fn);
        merge(out, eval(*n.kid(2), fn));
        return out;
      }
      case NodeKind::Sequence: {
        LabelSet last;
        for (const auto& k : n.kids) last = eval(*k, fn);
        return last;
      }
      case NodeKind::Assignment: {
        LabelSet v = eval(*n.kid(1), fn);
        if (n.name != "=") merge(v, eval(*n.kid(0), fn));
        assign(*n.kid(0), &*n.kid(1), v, fn);
        return v;
      }
      case NodeKind::MemberAccess:
        return read_member(n, fn);
      case NodeKind::PropertyAccess: {
        eval(*n.kid(1), fn);
        auto owners = data_owners(*n.kid(0), fn);
        if (owners.empty()) return eval(*n.kid(0), fn);
        if (is_string_literal(n.kid(1))) return page_data(owners, data_field(n.kid(1)->value));
        return page_data(owners, {});
      }
      case NodeKind::Call:
      case NodeKind::New:
        return eval_call(n, fn);
      case NodeKind::VarDecl:
        for (const auto& d : n.kids) {
          if (!d->kid(0)) continue;
          LabelSet v = d->kid(1) ? eval(*d->kid(1), fn) : LabelSet{};
          bind_pattern(*d->kid(0), d->kid(1), v, fn);
        }
        return {};
      case NodeKind::ForIn:
      case NodeKind::ForOf: {
        LabelSet v = eval(*n.kid(1), fn);
        const Node* left = n.kid(0);
        if (left->kind == NodeKind::VarDecl) {
          for (const auto& d : left->kids)
            if (d->kid(0)) bind_pattern(*d->kid(0), nullptr, v, fn);
        } else {
          assign(*left, nullptr, v, fn);
        }
        eval(*n.kid(2), fn);
        return {};
      }
      case NodeKind::Return:
        if (n.kid(0)) add({TaintLoc::Kind::Ret, fn, {}, {}, nullptr}, eval(*n.kid(0), fn));
        return {};
      case NodeKind::Try:
        eval(*n.kid(0), fn);
        for (std::size_t k = 2; k < n.kids.size(); ++k) eval(*n.kids[k], fn);
        return {};
      case NodeKind::ClassDef:
        if (n.kid(0)) eval(*n.kid(0), fn);
        return {};
      case NodeKind::DefaultValue:
        return eval(*n.kid(1), fn);
      case NodeKind::Opaque: {
        for (const auto& k : n.kids) eval(*k, fn);
        LabelSet in;
        for (const auto& r : n.reads) merge(in, get(var(fn, r)));
        for (const auto& w : n.writes) add(var(fn, w), in);
        return in;
      }
      case NodeKind::Import:
      case NodeKind::Break:
      case NodeKind::Continue:
      case NodeKind::Empty:
        return {};
      default: {
        LabelSet out;
        for (const auto& k : n.kids)
          if (k) merge(out, eval(*k, fn));
        return n.kind == NodeKind::ExprStmt ? out : LabelSet{};
      }
    }
  }

  LabelSet sink_payload(const Node& call, int fn, const SinkApi& sink) {
    LabelSet out;
    for (std::size_t k = 1; k < call.kids.size(); ++k) {
      const Node& arg = *call.kids[k];
      if (sink.payload.empty() || arg.kind != NodeKind::ObjectLiteral) {
        merge(out, eval(arg, fn));
        continue;
      }
      for (const auto& p : arg.kids) {
        if (p->kind == NodeKind::Spread) merge(out, eval(*p, fn));
        else if (p->kind == NodeKind::Property && p->kid(0) &&
                 std::find(sink.payload.begin(), sink.payload.end(), p->name) != sink.payload.end())
          merge(out, eval(*p->kid(0), fn));
      }
    }
    return out;
  }

 private:
  TaintLoc var(int fn, const std::string& name) const {
    BindingKey b = index_.lookup(fn, name);
    return {TaintLoc::Kind::Var, b.scope, name, {}, nullptr};
  }

  LabelSet get(const TaintLoc& l) const {
    auto it = st_.locs.find(l);
    return it == st_.locs.end() ? LabelSet{} : it->second;
  }

  void add(const TaintLoc& l, const LabelSet& labels) {
    if (labels.empty()) return;
    auto& cur = st_.locs[l];
    std::size_t before = cur.size();
    cur.insert(labels.begin(), labels.end());
    if (cur.size() != before) changed_ = true;
  }

  const Resolved& resolved(const Node& n, int fn) {
    auto key = std::make_pair(&n, fn);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, index_.resolve(n, fn)).first;
    return it->second;
  }

  // Owners whose data object `e` denotes: this.data, this.properties, getApp().globalData
  std::set<std::string> data_owners(const Node& e, int fn) {
    if (e.kind != NodeKind::MemberAccess || (e.name != "data" && e.name != "properties" && e.name != "globalData"))
      return {};
    return resolved(*e.kid(0), fn).owners;
  }

  LabelSet page_data(const std::set<std::string>& owners, const std::string& field) {
    LabelSet out;
    for (const auto& o : owners) {
      if (!field.empty()) {
        merge(out, get({TaintLoc::Kind::PageData, -1, field, o, nullptr}));
        merge(out, get({TaintLoc::Kind::PageData, -1, "*", o, nullptr}));
        continue;
      }
      for (const auto& [loc, labels] : st_.locs)
        if (loc.kind == TaintLoc::Kind::PageData && loc.owner == o) merge(out, labels);
    }
    return out;
  }

  LabelSet read_member(const Node& m, int fn) {
    if (auto owners = data_owners(*m.kid(0), fn); !owners.empty()) return page_data(owners, m.name);
    if (auto owners = data_owners(m, fn); !owners.empty()) return page_data(owners, {});
    const Resolved& base = resolved(*m.kid(0), fn);
    if (!base.owners.empty()) {
      LabelSet out;
      for (const auto& o : base.owners) merge(out, get({TaintLoc::Kind::OwnerProp, -1, m.name, o, nullptr}));
      return out;
    }
    return eval(*m.kid(0), fn);
  }

  LabelSet member_of(const Node* value, const std::string& key, const LabelSet& whole, int fn) {
    if (!value) return whole;
    if (auto owners = data_owners(*value, fn); !owners.empty()) return page_data(owners, key);
    return whole;
  }

  void bind_pattern(const Node& t, const Node* value, const LabelSet& labels, int fn) {
    switch (t.kind) {
      case NodeKind::Identifier:
        add(var(fn, t.name), labels);
        break;
      case NodeKind::DefaultValue: {
        LabelSet v = labels;
        merge(v, eval(*t.kid(1), fn));
        bind_pattern(*t.kid(0), value, v, fn);
        break;
      }
      case NodeKind::ObjectLiteral:
        for (const auto& p : t.kids) {
          if (p->kind == NodeKind::Spread && p->kid(0)) bind_pattern(*p->kid(0), nullptr, labels, fn);
          else if (p->kind == NodeKind::Property && p->kid(0))
            bind_pattern(*p->kid(0), nullptr, member_of(value, p->name, labels, fn), fn);
        }
        break;
      case NodeKind::ArrayLiteral:
      case NodeKind::Spread:
        for (const auto& e : t.kids) bind_pattern(*e, nullptr, labels, fn);
        break;
      case NodeKind::MemberAccess:
      case NodeKind::PropertyAccess:
        assign(t, nullptr, labels, fn);
        break;
      default:
        break;
    }
  }

  void assign(const Node& t, const Node* value, const LabelSet& labels, int fn) {
    switch (t.kind) {
      case NodeKind::Identifier:
        add(var(fn, t.name), labels);
        return;
      case NodeKind::MemberAccess:
      case NodeKind::PropertyAccess: {
        std::string key = "*";
        if (t.kind == NodeKind::MemberAccess) key = t.name;
        else if (is_string_literal(t.kid(1))) key = data_field(t.kid(1)->value);
        if (auto owners = data_owners(*t.kid(0), fn); !owners.empty()) {
          for (const auto& o : owners) add({TaintLoc::Kind::PageData, -1, key, o, nullptr}, labels);
          return;
        }
        if (t.kind == NodeKind::MemberAccess) {
          const Resolved& base = resolved(*t.kid(0), fn);
          if (!base.owners.empty()) {
            for (const auto& o : base.owners) add({TaintLoc::Kind::OwnerProp, -1, t.name, o, nullptr}, labels);
            return;
          }
        }
        if (!labels.empty()) assign(*t.kid(0), nullptr, labels, fn);
        return;
      }
      case NodeKind::ObjectLiteral:
      case NodeKind::ArrayLiteral:
      case NodeKind::DefaultValue:
        bind_pattern(t, value, labels, fn);
        return;
      default:
        return;
    }
  }

  LabelSet eval_call(const Node& call, int fn) {
    const Node* callee = call.kid(0);
    std::vector<LabelSet> args;
    std::vector<bool> spread;
    for (std::size_t k = 1; k < call.kids.size(); ++k) {
      args.push_back(eval(*call.kids[k], fn));
      spread.push_back(call.kids[k]->kind == NodeKind::Spread);
    }
    LabelSet all_args;
    for (const auto& a : args) merge(all_args, a);

    LabelSet out;
    if (auto it = call_sources_.find(&call); it != call_sources_.end())
      for (int id : it->second) out.insert({-1, id});

    if (call.kind == NodeKind::New) {
      if (callee && callee->kind == NodeKind::Identifier && callee->name == "Promise")
        merge(out, get({TaintLoc::Kind::CallRet, -1, {}, {}, &call}));
    }
    if (callee && callee->kind == NodeKind::Identifier) {
      BindingKey b = index_.lookup(fn, callee->name);
      if (auto it = resolvers_.find(b); it != resolvers_.end())
        add({TaintLoc::Kind::CallRet, -1, {}, {}, it->second}, all_args);
    }
    if (callee && callee->kind == NodeKind::MemberAccess && callee->name == "setData") {
      const Resolved& base = resolved(*callee->kid(0), fn);
      if (!base.owners.empty()) {
        const Node* obj = call.kid(1);
        for (const auto& o : base.owners) {
          if (obj && obj->kind == NodeKind::ObjectLiteral) {
            for (const auto& p : obj->kids) {
              if (p->kind == NodeKind::Property && p->kid(0)) {
                std::string key = p->name;
                if (p->computed && key.empty()) key = "*";
                add({TaintLoc::Kind::PageData, -1, data_field(key), o, nullptr}, eval(*p->kid(0), fn));
              } else if (p->kind == NodeKind::Spread) {
                add({TaintLoc::Kind::PageData, -1, "*", o, nullptr}, eval(*p, fn));
              }
            }
          } else if (!args.empty()) {
            add({TaintLoc::Kind::PageData, -1, "*", o, nullptr}, args[0]);
          }
        }
        return out;
      }
    }
    std::string api;
    if (call.kind == NodeKind::Call && subapi_call(index_, call, fn, tax_, api)) {
      // callbacks registered on a tainted manager object receive its data
      if (callee && callee->kind == NodeKind::MemberAccess) {
        LabelSet recv = eval(*callee->kid(0), fn);
        if (!recv.empty())
          for (const CallEdge* e : graph_.edges_at(&call)) {
            if (e->tag != EdgeTag::Callback && e->tag != EdgeTag::Listener) continue;
            const auto& info = index_.function(e->callee);
            if (!info.node || info.node->kind != NodeKind::FunctionDef) continue;
            for (std::size_t i = 0; i < info.node->param_count(); ++i)
              add_param(e->callee, static_cast<int>(i), call, fn, recv);
          }
      }
      return out;
    }

    std::vector<int> direct, argument;
    for (const CallEdge* e : graph_.edges_at(&call)) {
      if (e->tag == EdgeTag::Direct) direct.push_back(e->callee);
      else if (e->tag == EdgeTag::Argument) argument.push_back(e->callee);
    }
    bool is_bind = callee && callee->kind == NodeKind::MemberAccess && callee->name == "bind";
    if (!direct.empty() && !is_bind) {
      for (int g : direct) {
        const auto& info = index_.function(g);
        if (!info.node || info.node->kind != NodeKind::FunctionDef) continue;
        // f.call(self, a, b) and f.apply(self, list) pass arguments shifted
        std::vector<LabelSet> actual = args;
        std::vector<bool> actual_spread = spread;
        if (callee->kind == NodeKind::MemberAccess && (callee->name == "call" || callee->name == "apply") &&
            !resolved(*callee, fn).functions.count(g)) {
          if (callee->name == "call") {
            if (!actual.empty()) {
              actual.erase(actual.begin());
              actual_spread.erase(actual_spread.begin());
            }
          } else {
            actual = {args.size() > 1 ? args[1] : LabelSet{}};
            actual_spread = {true};
          }
        }
        auto arg_at = [&](std::size_t i) {
          LabelSet v = i < actual.size() ? actual[i] : LabelSet{};
          for (std::size_t k = 0; k < actual.size() && k <= i; ++k)
            if (actual_spread[k]) merge(v, actual[k]);
          return v;
        };
        std::size_t params = info.node->param_count();
        for (std::size_t i = 0; i < params; ++i) {
          LabelSet v = arg_at(i);
          if (info.node->kid(i)->kind == NodeKind::Spread)
            for (std::size_t k = i; k < actual.size(); ++k) merge(v, actual[k]);
          add_param(g, static_cast<int>(i), call, fn, v);
        }
        for (const auto& [f, i] : get({TaintLoc::Kind::Ret, g, {}, {}, nullptr})) {
          if (f == g) merge(out, arg_at(static_cast<std::size_t>(i)));
          else out.insert({f, i});
        }
      }
      return out;
    }

    LabelSet base;
    if (callee && callee->kind == NodeKind::MemberAccess) base = eval(*callee->kid(0), fn);
    else if (callee) eval(*callee, fn);
    LabelSet everything = base;
    merge(everything, all_args);
    merge(out, everything);
    if (callee && callee->kind == NodeKind::MemberAccess && kMutators.count(callee->name))
      assign(*callee->kid(0), nullptr, all_args, fn);
    if (callee && js::dotted_name(*callee) == "Object.assign" && args.size() > 1) {
      LabelSet rest;
      for (std::size_t k = 1; k < args.size(); ++k) merge(rest, args[k]);
      assign(*call.kid(1), nullptr, rest, fn);
    }
    for (int g : argument) {
      const auto& info = index_.function(g);
      if (!info.node || info.node->kind != NodeKind::FunctionDef) continue;
      for (std::size_t i = 0; i < info.node->param_count(); ++i)
        add_param(g, static_cast<int>(i), call, fn, everything);
    }
    return out;
  }

  void add_param(int g, int i, const Node& call, int caller, const LabelSet& labels) {
    if (labels.empty()) return;
    auto& slot = st_.param_in[{g, i}][&call];
    slot.first = caller;
    std::size_t before = slot.second.size();
    slot.second.insert(labels.begin(), labels.end());
    if (slot.second.size() != before) changed_ = true;
  }

  TaintState& st_;
  const CallGraph& graph_;
  const ScriptIndex& index_;
  const Taxonomy& tax_;
  std::set<int> reachable_;
  bool changed_ = false;
  std::map<const Node*, std::vector<int>> call_sources_;
  std::map<BindingKey, const Node*> resolvers_;
  std::map<std::pair<const Node*, int>, Resolved> cache_;
};

}  // namespace

// ---- state queries ----------------------------------------------------------

std::set<int> TaintState::expand(const LabelSet& labels) const {
  std::set<int> out;
  std::set<TaintLabel> seen;
  std::deque<TaintLabel> queue(labels.begin(), labels.end());
  while (!queue.empty()) {
    TaintLabel l = queue.front();
    queue.pop_front();
    if (!seen.insert(l).second) continue;
    if (l.first < 0) {
      out.insert(l.second);
      continue;
    }
    auto it = param_in.find(l);
    if (it == param_in.end()) continue;
    for (const auto& [call, in] : it->second) queue.insert(queue.end(), in.second.begin(), in.second.end());
  }
  return out;
}

ItemSet TaintState::items(const LabelSet& labels) const {
  ItemSet out;
  for (int s : expand(labels)) out.insert(sources[static_cast<std::size_t>(s)].items.begin(),
                                          sources[static_cast<std::size_t>(s)].items.end());
  return out;
}

ItemSet TaintState::items_at(const TaintLoc& loc) const {
  auto it = locs.find(loc);
  return it == locs.end() ? ItemSet{} : items(it->second);
}

ItemSet TaintState::binding_items(int scope, const std::string& name) const {
  return items_at({TaintLoc::Kind::Var, scope, name, {}, nullptr});
}

ItemSet TaintState::page_data_items(const std::string& owner, const std::string& field) const {
  ItemSet out = items_at({TaintLoc::Kind::PageData, -1, field, owner, nullptr});
  ItemSet whole = items_at({TaintLoc::Kind::PageData, -1, "*", owner, nullptr});
  out.insert(whole.begin(), whole.end());
  return out;
}

// ---- operations -------------------------------------------------------------

std::vector<SourcePoint> mark_sources(const CallGraph& graph, const ScriptIndex& index, const ScriptModels& models,
                                      const std::vector<UipSource>& uips, const Taxonomy& tax) {
  std::vector<SourcePoint> out;
  auto push = [&](SourcePoint s) {
    s.id = static_cast<int>(out.size());
    out.push_back(std::move(s));
  };
  auto reach = graph.reachable();
  auto resolvers = promise_resolvers(index);

  for (const auto& f : index.functions()) {
    if (!reach.count(f.id) || f.kind == FunctionInfo::Kind::Entry) continue;
    for (const Node* call : index.call_sites(f.id)) {
      std::string name;
      if (call->kind != NodeKind::Call || !subapi_call(index, *call, f.id, tax, name)) continue;
      const SubApiMapping* m = tax.resolve_subapi(name);
      if (!m) continue;
      auto value_source = [&](SourceKind kind) {
        SourcePoint s;
        s.kind = kind;
        s.items = m->items;
        s.fn = f.id;
        s.span = call->span;
        s.file = f.file;
        s.api = name;
        s.call = call;
        push(std::move(s));
      };
      if (m->style == CallbackStyle::SyncReturn || name.ends_with("Sync")) {
        value_source(SourceKind::SubApiReturn);
        continue;
      }
      bool has_callback_prop = false;
      for (std::size_t k = 1; k < call->kids.size(); ++k) {
        if (call->kids[k]->kind != NodeKind::ObjectLiteral) continue;
        for (const auto& p : call->kids[k]->kids) {
          if (p->kind != NodeKind::Property || (p->name != "success" && p->name != "complete" && p->name != "fail"))
            continue;
          has_callback_prop = true;
          // success: resolve -> the promise's value carries the data
          const Node* v = p->kid(0);
          if (p->name != "fail" && v && v->kind == NodeKind::Identifier)
            if (auto it = resolvers.find(index.lookup(f.id, v->name)); it != resolvers.end()) {
              SourcePoint s;
              s.kind = SourceKind::SubApiCallback;
              s.items = m->items;
              s.fn = f.id;
              s.span = call->span;
              s.file = f.file;
              s.api = name;
              s.call = it->second;
              push(std::move(s));
            }
        }
      }
      for (const CallEdge* e : graph.edges_at(call)) {
        bool use = m->style == CallbackStyle::EventListener
                       ? e->tag == EdgeTag::Listener
                       : e->tag == EdgeTag::Callback && (e->detail == "success" || e->detail == "complete");
        if (!use) continue;
        const auto& cb = index.function(e->callee);
        SourcePoint s;
        s.kind = SourceKind::SubApiCallback;
        s.items = m->items;
        s.fn = cb.id;
        s.bindings = first_param_names(cb);
        s.span = first_param_span(cb);
        s.file = cb.file;
        s.api = name;
        push(std::move(s));
      }
      // promise style: no callbacks given, the result carries the data
      if (m->style == CallbackStyle::SuccessCallback && !has_callback_prop) value_source(SourceKind::SubApiCallback);
    }
  }

  auto handler_fn = [&](const std::string& owner, const std::string& name) -> int {
    if (const RegistrationModel* m = models.owner(owner)) {
      if (auto it = m->handlers.find(name); it != m->handlers.end()) return it->second;
      if (auto it = m->lifecycle_fns.find(name); it != m->lifecycle_fns.end()) return it->second;
    }
    const auto& om = index.owner_methods(owner);
    if (auto it = om.find(name); it != om.end() && !it->second.empty()) return *it->second.begin();
    return -1;
  };
  auto handler_source = [&](SourceKind kind, const std::string& owner, const std::string& handler,
                            const ItemSet& items) {
    int fn = handler_fn(owner, handler);
    if (fn < 0) return;
    const auto& info = index.function(fn);
    SourcePoint s;
    s.kind = kind;
    s.items = items;
    s.fn = fn;
    s.bindings = first_param_names(info);
    s.span = first_param_span(info);
    s.file = info.file;
    s.api = handler;
    s.owner = owner;
    push(std::move(s));
  };

  std::map<std::pair<std::string, std::string>, ItemSet> forms;
  for (const auto& u : uips) {
    if (!u.form_handler.empty()) forms[{u.page_route, u.form_handler}].insert(u.items.begin(), u.items.end());
    if (u.binding_attr == "bindsubmit" || u.binding_attr == "catchsubmit") {
      if (u.handler_name == u.form_handler) continue;
    }
    handler_source(SourceKind::UipHandlerParam, u.page_route, u.handler_name, u.items);
  }
  for (const auto& [key, items] : forms) handler_source(SourceKind::FormSubmitEvent, key.first, key.second, items);
  return out;
}

TaintState propagate(const CallGraph& graph, const ScriptIndex& index, const std::vector<SourcePoint>& sources,
                     const Taxonomy& tax) {
  TaintState st;
  st.sources = sources;
  Engine engine(st, graph, index, tax);
  engine.seed();
  constexpr int kMaxIterations = 10000;
  while (st.iterations < kMaxIterations) {
    ++st.iterations;
    if (!engine.run_once()) break;
  }
  return st;
}

std::vector<TaintFlow> find_flows(const TaintState& state, const CallGraph& graph, const ScriptIndex& index,
                                  const Taxonomy& tax) {
  TaintState scratch = state;
  Engine engine(scratch, graph, index, tax);
  engine.seed();
  std::vector<TaintFlow> out;

  for (const auto& f : index.functions()) {
    if (!engine.reachable(f.id) || f.kind == FunctionInfo::Kind::Entry) continue;
    for (const Node* call : index.call_sites(f.id)) {
      std::string name;
      if (call->kind != NodeKind::Call || !subapi_call(index, *call, f.id, tax, name)) continue;
      const SinkApi* sink = tax.sink(name);
      if (!sink) continue;
      LabelSet payload = engine.sink_payload(*call, f.id, *sink);
      if (payload.empty()) continue;

      // backward search from the payload labels to sources, remembering call-site hops
      std::map<int, std::vector<std::pair<int, Span>>> reached;
      std::set<TaintLabel> seen;
      std::deque<std::pair<TaintLabel, std::vector<std::pair<int, Span>>>> queue;
      for (const auto& l : payload) queue.push_back({l, {}});
      while (!queue.empty()) {
        auto [l, hops] = queue.front();
        queue.pop_front();
        if (!seen.insert(l).second) continue;
        if (l.first < 0) {
          reached.emplace(l.second, hops);
          continue;
        }
        auto it = state.param_in.find(l);
        if (it == state.param_in.end()) continue;
        for (const auto& [site, in] : it->second) {
          auto next = hops;
          next.insert(next.begin(), {in.first, site->span});
          for (const auto& nl : in.second) queue.push_back({nl, next});
        }
      }

      std::string url;
      if (const Node* opts = call->kid(1); opts && opts->kind == NodeKind::ObjectLiteral)
        for (const auto& p : opts->kids)
          if (p->kind == NodeKind::Property && p->name == "url" && is_string_literal(p->kid(0))) url = p->kid(0)->value;

      for (const auto& [sid, hops] : reached) {
        const SourcePoint& src = state.sources[static_cast<std::size_t>(sid)];
        TaintFlow flow;
        flow.source = src;
        flow.sink = name;
        flow.sink_span = call->span;
        flow.sink_fn = f.id;
        flow.sink_file = f.file;
        flow.items = src.items;
        flow.path.push_back({src.fn, src.span});
        flow.path.insert(flow.path.end(), hops.begin(), hops.end());
        flow.path.push_back({f.id, call->span});
        flow.url = url;
        out.push_back(std::move(flow));
      }
    }
  }
  return out;
}

ItemSet collect_set(const std::vector<TaintFlow>& flows) {
  ItemSet out;
  for (const auto& f : flows) out.insert(f.items.begin(), f.items.end());
  return out;
}

}  // namespace spo

namespace spo {

FlowRecord describe(const TaintFlow& flow, const ScriptIndex& index) {
  FlowRecord r;
  r.source_kind = std::string(to_string(flow.source.kind));
  r.source_api = flow.source.api;
  r.source = {flow.source.file, flow.source.span};
  r.sink = flow.sink;
  r.sink_at = {flow.sink_file, flow.sink_span};
  r.items = flow.items;
  r.url = flow.url;
  for (const auto& [fn, span] : flow.path) r.path.push_back({index.function(fn).file, span});
  return r;
}

}  // namespace spo
