#include "spo/script.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "spo/js_parser.hpp"

namespace spo {

using js::Node;
using js::NodeKind;

namespace {

constexpr int kMaxResolveDepth = 16;

const std::set<std::string> kPageLifecycle = {"onLoad", "onShow", "onReady", "onHide", "onUnload"};
const std::set<std::string> kAppLifecycle = {"onLaunch", "onShow", "onHide", "onError", "onPageNotFound",
                                             "onUnhandledRejection", "onThemeChange"};
const std::set<std::string> kComponentLifecycle = {"created", "attached", "ready", "moved", "detached", "error",
                                                   "show",    "hide",     "resize"};

bool is_string_literal(const Node* n) {
  return n && n->kind == NodeKind::Literal && n->literal == js::LiteralKind::String;
}

std::string strip_js(const std::string& path) {
  return path.ends_with(".js") ? path.substr(0, path.size() - 3) : path;
}

bool has_registration_call(const Node& root, const std::string& name) {
  bool found = false;
  js::walk(root, [&](const Node& n) {
    if (found) return false;
    if (n.kind == NodeKind::Call && n.kid(0) && n.kid(0)->kind == NodeKind::Identifier && n.kid(0)->name == name)
      found = true;
    return true;
  });
  return found;
}

}  // namespace

ParsedScripts parse_package_scripts(const SubAppPackage& pkg) {
  ParsedScripts out;
  for (const auto& [path, text] : pkg.files) {
    if (!path.ends_with(".js")) continue;
    try {
      out.files.emplace(path, js::parse_script(text, path));
    } catch (const ParseError& e) {
      out.errors.emplace(path, e.what());
    }
  }
  return out;
}

std::string FunctionInfo::label() const {
  if (kind == Kind::Entry) return "<main>";
  if (kind == Kind::ModuleInit) return file + "::<module>";
  return file + "::" + name;
}

void Resolved::merge(const Resolved& o) {
  functions.insert(o.functions.begin(), o.functions.end());
  for (const auto& obj : o.objects)
    if (std::find(objects.begin(), objects.end(), obj) == objects.end()) objects.push_back(obj);
  modules.insert(o.modules.begin(), o.modules.end());
  owners.insert(o.owners.begin(), o.owners.end());
  wx_types.insert(o.wx_types.begin(), o.wx_types.end());
  wx = wx || o.wx;
}

// ---- index construction -----------------------------------------------------

ScriptIndex::ScriptIndex(const ParsedScripts& scripts, const SubAppPackage& pkg, const Taxonomy* tax)
    : scripts_(scripts), pkg_(pkg), tax_(tax) {
  FunctionInfo entry;
  entry.kind = FunctionInfo::Kind::Entry;
  entry.name = "<main>";
  functions_.push_back(entry);
  declared_.emplace_back();
  params_.emplace_back();
  calls_.emplace_back();
  returns_.emplace_back();

  std::set<std::string> page_scripts;
  for (const Page* p : pkg.pages()) page_scripts.insert(p->script_path());

  for (const auto& [path, ast] : scripts.files) {
    std::string owner;
    if (path == "app.js") owner = "app";
    else if (page_scripts.count(path)) owner = strip_js(path);
    else if (has_registration_call(*ast.root, "Component")) owner = strip_js(path);
    file_owner_[path] = owner;

    FunctionInfo mi;
    mi.id = static_cast<int>(functions_.size());
    mi.kind = FunctionInfo::Kind::ModuleInit;
    mi.file = path;
    mi.owner = owner;
    mi.name = "<module>";
    mi.node = ast.root.get();
    functions_.push_back(mi);
    declared_.emplace_back();
    params_.emplace_back();
    calls_.emplace_back();
    returns_.emplace_back();
    module_init_[path] = mi.id;
    // CommonJS module scope
    declared_[static_cast<std::size_t>(mi.id)].insert({"module", "exports"});
    collect(*ast.root, mi.id, path, true);
  }
  for (const auto& [path, ast] : scripts.files) record(*ast.root, module_init_[path], path);
}

int ScriptIndex::add_function(const Node& def, int parent, const std::string& file, const std::string& hint) {
  FunctionInfo fi;
  fi.id = static_cast<int>(functions_.size());
  fi.kind = FunctionInfo::Kind::Function;
  fi.file = file;
  fi.owner = file_owner_[file];
  fi.node = &def;
  fi.parent = parent;
  if (!def.name.empty()) fi.name = def.name;
  else if (!hint.empty()) fi.name = hint;
  else fi.name = "anonymous#" + std::to_string(anon_counter_[file]++);
  functions_.push_back(fi);
  declared_.emplace_back();
  params_.emplace_back();
  calls_.emplace_back();
  returns_.emplace_back();
  fn_of_node_[&def] = fi.id;
  return fi.id;
}

void ScriptIndex::declare_pattern(const Node& target, int fn, const Node* value, int value_fn,
                                  std::vector<std::string> path, bool is_param, const std::string& file) {
  auto f = static_cast<std::size_t>(fn);
  switch (target.kind) {
    case NodeKind::Identifier:
      declared_[f].insert(target.name);
      if (is_param) params_[f].insert(target.name);
      if (value) assigned_[{fn, target.name}].push_back({value, value_fn, std::move(path), {}, {}});
      break;
    case NodeKind::DefaultValue:
      declare_pattern(*target.kid(0), fn, value, value_fn, path, is_param, file);
      if (target.kid(0)->kind == NodeKind::Identifier)
        assigned_[{fn, target.kid(0)->name}].push_back({target.kid(1), fn, {}, {}, {}});
      collect(*target.kid(1), fn, file, false);
      break;
    case NodeKind::ObjectLiteral:
      for (const auto& p : target.kids) {
        if (p->kind == NodeKind::Spread) {
          declare_pattern(*p->kid(0), fn, value, value_fn, path, is_param, file);
        } else if (p->kind == NodeKind::Property && p->kid(0)) {
          auto sub = path;
          sub.push_back(p->name);
          declare_pattern(*p->kid(0), fn, value, value_fn, sub, is_param, file);
          if (p->computed && p->kid(1)) collect(*p->kid(1), fn, file, false);
        }
      }
      break;
    case NodeKind::ArrayLiteral:
      for (const auto& e : target.kids) {
        auto sub = path;
        sub.push_back("[]");
        declare_pattern(*e, fn, value, value_fn, sub, is_param, file);
      }
      break;
    case NodeKind::Spread:
      declare_pattern(*target.kid(0), fn, value, value_fn, path, is_param, file);
      break;
    default:
      break;
  }
}

void ScriptIndex::collect(const Node& n, int fn, const std::string& file, bool statement, const std::string& hint,
                          bool self_bind) {
  switch (n.kind) {
    case NodeKind::FunctionDef: {
      int id = add_function(n, fn, file, hint);
      enclosing_[&n] = fn;
      if (!n.name.empty() && !n.arrow) {
        if (statement) {
          declared_[static_cast<std::size_t>(fn)].insert(n.name);
          assigned_[{fn, n.name}].push_back({&n, fn, {}, {}, {}});
        } else if (self_bind) {
          declared_[static_cast<std::size_t>(id)].insert(n.name);
          assigned_[{id, n.name}].push_back({&n, id, {}, {}, {}});
        }
      }
      for (std::size_t k = 0; k + 1 < n.kids.size(); ++k) declare_pattern(*n.kids[k], id, nullptr, id, {}, true, file);
      const Node* body = n.body();
      if (!body) return;
      if (n.expr_body) collect(*body, id, file, false);
      else
        for (const auto& s : body->kids) collect(*s, id, file, true);
      return;
    }
    case NodeKind::VarDecl:
      for (const auto& d : n.kids) {
        const Node* target = d->kid(0);
        const Node* init = d->kid(1);
        if (!target) continue;
        declare_pattern(*target, fn, init, fn, {}, false, file);
        if (init) collect(*init, fn, file, false, target->kind == NodeKind::Identifier ? target->name : "");
      }
      return;
    case NodeKind::ClassDef:
      if (statement && !n.name.empty()) declared_[static_cast<std::size_t>(fn)].insert(n.name);
      for (const auto& k : n.kids) collect(*k, fn, file, false);
      return;
    case NodeKind::Property:
      if (n.kid(0)) collect(*n.kid(0), fn, file, false, n.name, !n.method);
      if (n.kid(1)) collect(*n.kid(1), fn, file, false);
      return;
    case NodeKind::Assignment: {
      std::string name;
      if (const Node* t = n.kid(0)) {
        if (t->kind == NodeKind::Identifier) name = t->name;
        else if (t->kind == NodeKind::MemberAccess) name = t->name;
      }
      collect(*n.kid(0), fn, file, false);
      collect(*n.kid(1), fn, file, false, name);
      return;
    }
    case NodeKind::Try:
      collect(*n.kid(0), fn, file, false);
      if (n.kid(1) && n.kid(1)->kind != NodeKind::Empty) declare_pattern(*n.kid(1), fn, nullptr, fn, {}, false, file);
      for (std::size_t k = 2; k < n.kids.size(); ++k) collect(*n.kids[k], fn, file, false);
      return;
    case NodeKind::Import: {
      std::string mod = resolve_module(file, n.value);
      for (const auto& spec : n.kids) {
        const Node* local = spec->kid(0);
        if (!local) continue;
        declared_[static_cast<std::size_t>(fn)].insert(local->name);
        AssignedValue av;
        av.fn = fn;
        av.module = mod;
        av.export_name = spec->name;
        av.value = mod.empty() ? nullptr : spec.get();
        assigned_[{fn, local->name}].push_back(av);
      }
      return;
    }
    case NodeKind::Call:
    case NodeKind::New:
      enclosing_[&n] = fn;
      break;
    default:
      break;
  }
  bool stmt_kids = n.kind == NodeKind::Program || n.kind == NodeKind::Block || n.kind == NodeKind::Case ||
                   n.kind == NodeKind::Export;
  for (const auto& k : n.kids)
    if (k) collect(*k, fn, file, stmt_kids);
}

void ScriptIndex::record(const Node& n, int fn, const std::string& file) {
  switch (n.kind) {
    case NodeKind::FunctionDef: {
      int id = fn_of_node_.at(&n);
      for (const auto& k : n.kids) record(*k, id, file);
      if (n.expr_body && n.body()) returns_[static_cast<std::size_t>(id)].push_back({n.body(), id});
      return;
    }
    case NodeKind::Return:
      if (n.kid(0)) returns_[static_cast<std::size_t>(fn)].push_back({n.kid(0), fn});
      break;
    case NodeKind::Call:
    case NodeKind::New: {
      calls_[static_cast<std::size_t>(fn)].push_back(&n);
      const Node* callee = n.kid(0);
      if (n.kind == NodeKind::Call && callee && callee->kind == NodeKind::Identifier &&
          (callee->name == "require" || callee->name == "import") && is_string_literal(n.kid(1)) &&
          lookup(fn, callee->name).scope < 0) {
        std::string mod = resolve_module(file, n.kid(1)->value);
        if (!mod.empty()) imports_[file].push_back({mod, &n});
      }
      break;
    }
    case NodeKind::Import: {
      std::string mod = resolve_module(file, n.value);
      if (!mod.empty()) imports_[file].push_back({mod, &n});
      break;
    }
    case NodeKind::Assignment:
      record_assignment(*n.kid(0), *n.kid(1), fn, file);
      break;
    case NodeKind::Export: {
      auto& ex = exports_[file];
      if (n.is_default) {
        ex["default"].push_back({n.kid(0), fn, {}, {}, {}});
        break;
      }
      for (const auto& k : n.kids) {
        if (k->kind == NodeKind::VarDecl) {
          for (const auto& d : k->kids)
            if (d->kid(0) && d->kid(0)->kind == NodeKind::Identifier && d->kid(1))
              ex[d->kid(0)->name].push_back({d->kid(1), fn, {}, {}, {}});
        } else if (k->kind == NodeKind::FunctionDef && !k->name.empty()) {
          ex[k->name].push_back({k.get(), fn, {}, {}, {}});
        } else if (k->kind == NodeKind::Property && k->kid(0)) {
          if (n.value.empty()) {
            ex[k->name].push_back({k->kid(0), fn, {}, {}, {}});
          } else {
            AssignedValue av;
            av.fn = fn;
            av.module = resolve_module(file, n.value);
            av.export_name = k->kid(0)->name;
            av.value = av.module.empty() ? nullptr : k.get();
            ex[k->name].push_back(av);
          }
        }
      }
      break;
    }
    default:
      break;
  }
  for (const auto& k : n.kids)
    if (k) record(*k, fn, file);
}

void ScriptIndex::record_assignment(const Node& target, const Node& value, int fn, const std::string& file) {
  if (target.kind == NodeKind::Identifier) {
    assigned_[lookup(fn, target.name)].push_back({&value, fn, {}, {}, {}});
    return;
  }
  if (target.kind != NodeKind::MemberAccess) return;
  std::string dotted = js::dotted_name(target);
  if (dotted == "module.exports" && lookup(fn, "module").scope == module_init(file)) {
    exports_[file]["*"].push_back({&value, fn, {}, {}, {}});
    return;
  }
  if ((dotted.starts_with("module.exports.") || dotted.starts_with("exports.")) &&
      std::count(dotted.begin(), dotted.end(), '.') == (dotted.starts_with("module") ? 2 : 1)) {
    exports_[file][target.name].push_back({&value, fn, {}, {}, {}});
    return;
  }
  Resolved base = resolve_at(*target.kid(0), fn, 0);
  for (const auto& owner : base.owners) owner_props_[owner][target.name].push_back({&value, fn, {}, {}, {}});
}

void ScriptIndex::bind_call_arguments() {
  for (int round = 0; round < 2; ++round) {
    for (const auto& fi : functions_) {
      for (const Node* call : calls_[static_cast<std::size_t>(fi.id)]) {
        const Node* callee = call->kid(0);
        if (!callee) continue;
        std::size_t first_arg = 1;
        Resolved target = resolve_at(*callee, fi.id, 0);
        if (target.functions.empty() && callee->kind == NodeKind::MemberAccess && callee->name == "call") {
          target = resolve_at(*callee->kid(0), fi.id, 0);
          first_arg = 2;
        }
        for (int g : target.functions) {
          const Node* def = functions_[static_cast<std::size_t>(g)].node;
          if (!def || def->kind != NodeKind::FunctionDef) continue;
          for (std::size_t i = 0; i < def->param_count(); ++i) {
            const Node* param = def->kid(i);
            if (param->kind == NodeKind::DefaultValue) param = param->kid(0);
            const Node* arg = call->kid(first_arg + i);
            if (!arg || param->kind != NodeKind::Identifier) continue;
            if (arg->kind != NodeKind::FunctionDef && arg->kind != NodeKind::Identifier &&
                arg->kind != NodeKind::MemberAccess && arg->kind != NodeKind::ObjectLiteral)
              continue;
            Resolved r = resolve_at(*arg, fi.id, 0);
            if (r.functions.empty() && r.objects.empty()) continue;
            auto& values = assigned_[{g, param->name}];
            bool known = std::any_of(values.begin(), values.end(),
                                     [&](const AssignedValue& a) { return a.value == arg && a.fn == fi.id; });
            if (!known) values.push_back({arg, fi.id, {}, {}, {}});
          }
        }
      }
    }
  }
}

// ---- queries ----------------------------------------------------------------

int ScriptIndex::function_of(const Node* def) const {
  auto it = fn_of_node_.find(def);
  return it == fn_of_node_.end() ? -1 : it->second;
}

int ScriptIndex::module_init(const std::string& file) const {
  auto it = module_init_.find(file);
  return it == module_init_.end() ? -1 : it->second;
}

int ScriptIndex::enclosing(const Node* n) const {
  auto it = enclosing_.find(n);
  return it == enclosing_.end() ? -1 : it->second;
}

const std::vector<const Node*>& ScriptIndex::call_sites(int fn) const { return calls_[static_cast<std::size_t>(fn)]; }

const std::vector<std::pair<const Node*, int>>& ScriptIndex::returns(int fn) const {
  return returns_[static_cast<std::size_t>(fn)];
}

BindingKey ScriptIndex::lookup(int fn, const std::string& name) const {
  for (int cur = fn; cur >= 0; cur = functions_[static_cast<std::size_t>(cur)].parent)
    if (declared_[static_cast<std::size_t>(cur)].count(name)) return {cur, name};
  return {-1, name};
}

const std::vector<AssignedValue>& ScriptIndex::assigned(const BindingKey& b) const {
  static const std::vector<AssignedValue> none;
  auto it = assigned_.find(b);
  return it == assigned_.end() ? none : it->second;
}

bool ScriptIndex::is_parameter(const BindingKey& b) const {
  return b.scope >= 0 && params_[static_cast<std::size_t>(b.scope)].count(b.name);
}

const std::vector<std::pair<std::string, const Node*>>& ScriptIndex::imports(const std::string& file) const {
  static const std::vector<std::pair<std::string, const Node*>> none;
  auto it = imports_.find(file);
  return it == imports_.end() ? none : it->second;
}

void ScriptIndex::add_owner_method(const std::string& owner, const std::string& name, int fn) {
  owner_methods_[owner][name].insert(fn);
}

const std::map<std::string, std::set<int>>& ScriptIndex::owner_methods(const std::string& owner) const {
  static const std::map<std::string, std::set<int>> none;
  auto it = owner_methods_.find(owner);
  return it == owner_methods_.end() ? none : it->second;
}

const std::string& ScriptIndex::owner_of_file(const std::string& file) const {
  static const std::string none;
  auto it = file_owner_.find(file);
  return it == file_owner_.end() ? none : it->second;
}

std::string ScriptIndex::resolve_module(const std::string& from_file, const std::string& spec) const {
  if (spec.empty()) return {};
  namespace fs = std::filesystem;
  std::vector<fs::path> bases;
  if (spec.front() == '/') {
    bases.emplace_back(spec.substr(1));
  } else {
    bases.push_back(fs::path(from_file).parent_path() / spec);
    if (!spec.starts_with(".")) {
      bases.emplace_back(spec);
      bases.push_back(fs::path("miniprogram_npm") / spec);
    }
  }
  auto known = [&](const std::string& p) { return scripts_.files.count(p) || pkg_.files.count(p); };
  for (const auto& b : bases) {
    std::string s = b.lexically_normal().generic_string();
    if (s.starts_with("..")) continue;
    for (const std::string& cand : {s, s + ".js", s + "/index.js"})
      if (cand.ends_with(".js") && known(cand)) return cand;
  }
  return {};
}

Resolved ScriptIndex::resolve(const Node& expr, int fn) const { return resolve_at(expr, fn, 0); }

Resolved ScriptIndex::member(const Resolved& base, const std::string& prop) const { return member_at(base, prop, 0); }

Resolved ScriptIndex::resolve_binding(const BindingKey& b, int depth) const {
  Resolved r;
  for (const auto& a : assigned(b)) r.merge(resolve_assigned(a, depth));
  return r;
}

Resolved ScriptIndex::resolve_assigned(const AssignedValue& a, int depth) const {
  Resolved r;
  if (depth > kMaxResolveDepth || !a.value) return r;
  if (!a.module.empty()) {
    if (a.export_name == "*") r.modules.insert(a.module);
    else r = module_export(a.module, a.export_name, depth + 1);
  } else {
    r = resolve_at(*a.value, a.fn, depth + 1);
  }
  for (const auto& m : a.member) r = member_at(r, m, depth + 1);
  return r;
}

Resolved ScriptIndex::module_export(const std::string& file, const std::string& name, int depth) const {
  Resolved r;
  if (depth > kMaxResolveDepth) return r;
  auto f = exports_.find(file);
  if (f == exports_.end()) return r;
  if (auto it = f->second.find(name); it != f->second.end())
    for (const auto& a : it->second) r.merge(resolve_assigned(a, depth + 1));
  if (auto it = f->second.find("*"); it != f->second.end()) {
    Resolved whole;
    for (const auto& a : it->second) whole.merge(resolve_assigned(a, depth + 1));
    if (name == "default" && !f->second.count("default")) r.merge(whole);
    else r.merge(member_at(whole, name, depth + 1));
  }
  return r;
}

Resolved ScriptIndex::resolve_at(const Node& e, int fn, int depth) const {
  Resolved r;
  if (depth > kMaxResolveDepth) return r;
  switch (e.kind) {
    case NodeKind::Identifier: {
      BindingKey b = lookup(fn, e.name);
      if (b.scope < 0) {
        if (e.name == "wx") r.wx = true;
        return r;
      }
      return resolve_binding(b, depth + 1);
    }
    case NodeKind::FunctionDef:
      if (int id = function_of(&e); id >= 0) r.functions.insert(id);
      return r;
    case NodeKind::This: {
      const auto& owner = functions_[static_cast<std::size_t>(fn)].owner;
      if (!owner.empty()) r.owners.insert(owner);
      return r;
    }
    case NodeKind::ObjectLiteral:
      r.objects.push_back({&e, fn});
      return r;
    case NodeKind::MemberAccess:
      return member_at(resolve_at(*e.kid(0), fn, depth + 1), e.name, depth + 1);
    case NodeKind::PropertyAccess:
      if (is_string_literal(e.kid(1))) return member_at(resolve_at(*e.kid(0), fn, depth + 1), e.kid(1)->value, depth + 1);
      return r;
    case NodeKind::Call: {
      const Node* callee = e.kid(0);
      if (!callee) return r;
      if (callee->kind == NodeKind::Identifier && lookup(fn, callee->name).scope < 0) {
        if (callee->name == "getApp") {
          r.owners.insert("app");
          return r;
        }
        if (callee->name == "require" && is_string_literal(e.kid(1))) {
          const auto& file = functions_[static_cast<std::size_t>(fn)].file;
          std::string mod = resolve_module(file, e.kid(1)->value);
          if (!mod.empty()) r.modules.insert(mod);
          return r;
        }
      }
      if (callee->kind == NodeKind::MemberAccess) {
        if (tax_) {
          Resolved base = resolve_at(*callee->kid(0), fn, depth + 1);
          if (base.wx)
            if (auto t = tax_->factory_type(callee->name)) r.wx_types.insert(*t);
        }
        if (callee->name == "bind") {
          Resolved target = resolve_at(*callee->kid(0), fn, depth + 1);
          r.functions = target.functions;
          return r;
        }
      }
      Resolved target = resolve_at(*callee, fn, depth + 1);
      for (int f : target.functions)
        for (const auto& [ret, rfn] : returns(f)) r.merge(resolve_at(*ret, rfn, depth + 1));
      return r;
    }
    case NodeKind::Logical:
      r = resolve_at(*e.kid(0), fn, depth + 1);
      r.merge(resolve_at(*e.kid(1), fn, depth + 1));
      return r;
    case NodeKind::Conditional:
      r = resolve_at(*e.kid(1), fn, depth + 1);
      r.merge(resolve_at(*e.kid(2), fn, depth + 1));
      return r;
    case NodeKind::Assignment:
      return resolve_at(*e.kid(1), fn, depth + 1);
    case NodeKind::Sequence:
      return e.kids.empty() ? r : resolve_at(*e.kids.back(), fn, depth + 1);
    case NodeKind::Unary:
      if (e.name == "await" && e.kid(0)) return resolve_at(*e.kid(0), fn, depth + 1);
      return r;
    default:
      return r;
  }
}

Resolved ScriptIndex::member_at(const Resolved& base, const std::string& prop, int depth) const {
  Resolved r;
  if (depth > kMaxResolveDepth) return r;
  for (const auto& [obj, ofn] : base.objects) {
    for (const auto& p : obj->kids) {
      if (p->kind == NodeKind::Property && p->name == prop && p->kid(0)) {
        r.merge(resolve_at(*p->kid(0), ofn, depth + 1));
      } else if (p->kind == NodeKind::Spread && p->kid(0)) {
        r.merge(member_at(resolve_at(*p->kid(0), ofn, depth + 1), prop, depth + 1));
      }
    }
  }
  for (const auto& m : base.modules) r.merge(module_export(m, prop, depth + 1));
  for (const auto& o : base.owners) {
    if (auto it = owner_methods_.find(o); it != owner_methods_.end())
      if (auto m = it->second.find(prop); m != it->second.end()) r.functions.insert(m->second.begin(), m->second.end());
    if (auto it = owner_props_.find(o); it != owner_props_.end())
      if (auto m = it->second.find(prop); m != it->second.end())
        for (const auto& a : m->second) r.merge(resolve_assigned(a, depth + 1));
  }
  return r;
}

// ---- models -----------------------------------------------------------------

const PageModel* ScriptModels::page(const std::string& route) const {
  for (const auto& p : pages)
    if (p.route == route) return &p;
  return nullptr;
}

const RegistrationModel* ScriptModels::owner(const std::string& o) const {
  if (o == "app") return &app;
  for (const auto& p : pages)
    if (p.owner == o) return &p;
  for (const auto& c : components)
    if (c.owner == o) return &c;
  return nullptr;
}

namespace {

struct ModelBuilder {
  ScriptIndex& index;
  Diagnostics& warnings;

  std::string key_name(const Node& prop, int fn) {
    if (!prop.computed || !prop.name.empty()) return prop.name;
    const Node* key = prop.kid(1);
    if (key && key->kind == NodeKind::Identifier) {
      for (const auto& a : index.assigned(index.lookup(fn, key->name)))
        if (a.member.empty() && is_string_literal(a.value)) return a.value->value;
    }
    return {};
  }

  void data_object(RegistrationModel& m, const Node& obj, int fn) {
    Resolved r = index.resolve(obj, fn);
    for (const auto& [o, ofn] : r.objects) {
      for (const auto& p : o->kids) {
        if (p->kind != NodeKind::Property) continue;
        std::string k = key_name(*p, ofn);
        if (k.empty()) continue;
        m.data_fields.insert(k);
        const Node* v = p->kid(0);
        if (v && v->kind == NodeKind::ArrayLiteral) {
          std::vector<std::string> strings;
          for (const auto& e : v->kids) {
            if (is_string_literal(e.get())) strings.push_back(e->value);
            else if (e->kind == NodeKind::ObjectLiteral)
              for (const auto& q : e->kids)
                if (q->kind == NodeKind::Property && is_string_literal(q->kid(0))) strings.push_back(q->kid(0)->value);
          }
          if (!strings.empty()) m.data_strings[k] = std::move(strings);
        }
      }
    }
  }

  void function_prop(RegistrationModel& m, const std::string& key, const Node& value, int fn, bool lifecycle) {
    Resolved r = index.resolve(value, fn);
    if (r.functions.empty()) return;
    int id = *r.functions.begin();
    if (lifecycle) m.lifecycle_fns[key] = id;
    else m.handlers[key] = id;
    index.add_owner_method(m.owner, key, id);
  }

  void fill(RegistrationModel& m, const Node& obj, int fn, const std::string& section, int depth = 0) {
    if (depth > 4) return;
    for (const auto& p : obj.kids) {
      if (p->kind == NodeKind::Spread && p->kid(0)) {
        for (const auto& [o, ofn] : index.resolve(*p->kid(0), fn).objects) fill(m, *o, ofn, section, depth + 1);
        continue;
      }
      if (p->kind != NodeKind::Property || !p->kid(0)) continue;
      std::string key = key_name(*p, fn);
      if (key.empty()) {
        warnings.push_back({"script", m.file,
                            "unresolved computed key in " + m.kind + " registration at line " +
                                std::to_string(p->span.line)});
        continue;
      }
      const Node& value = *p->kid(0);
      if (section.empty()) {
        if ((m.kind == "App" && key == "globalData") || (m.kind != "App" && key == "data")) {
          data_object(m, value, fn);
          continue;
        }
        if (m.kind == "Component") {
          if (key == "properties") {
            data_object(m, value, fn);
            continue;
          }
          if (key == "methods" || key == "lifetimes" || key == "pageLifetimes") {
            for (const auto& [o, ofn] : index.resolve(value, fn).objects) fill(m, *o, ofn, key, depth + 1);
            continue;
          }
        }
      }
      bool lifecycle = false;
      if (m.kind == "App") lifecycle = kAppLifecycle.count(key) > 0;
      else if (m.kind == "Page") lifecycle = kPageLifecycle.count(key) > 0;
      else if (section == "lifetimes" || section == "pageLifetimes") lifecycle = true;
      else if (section.empty()) lifecycle = kComponentLifecycle.count(key) > 0 || kPageLifecycle.count(key) > 0;
      else lifecycle = kPageLifecycle.count(key) > 0;  // page built with Component(): methods.onLoad
      function_prop(m, key, value, fn, lifecycle);
    }
  }

  // Finds the first App/Page/Component call of `file`; later ones are reported.
  void registration(RegistrationModel& m, const std::string& file, const std::set<std::string>& kinds) {
    std::vector<std::pair<const Node*, int>> calls;
    for (const auto& fi : index.functions()) {
      if (fi.file != file) continue;
      for (const Node* c : index.call_sites(fi.id)) {
        const Node* callee = c->kid(0);
        if (c->kind == NodeKind::Call && callee && callee->kind == NodeKind::Identifier &&
            kinds.count(callee->name) && index.lookup(fi.id, callee->name).scope < 0)
          calls.push_back({c, fi.id});
      }
    }
    std::sort(calls.begin(), calls.end(),
              [](const auto& a, const auto& b) { return a.first->span.begin < b.first->span.begin; });
    for (std::size_t k = 0; k < calls.size(); ++k) {
      const auto& [call, fn] = calls[k];
      if (k > 0) {
        warnings.push_back({"script", file,
                            "duplicate " + call->kid(0)->name + " registration at line " +
                                std::to_string(call->span.line) + " ignored"});
        continue;
      }
      m.registered = true;
      if (m.kind != "App") m.kind = call->kid(0)->name;
      if (!call->kid(1)) continue;
      for (const auto& [o, ofn] : index.resolve(*call->kid(1), fn).objects) fill(m, *o, ofn, "");
    }
  }
};

}  // namespace

ScriptModels extract_models(ScriptIndex& index, const SubAppPackage& pkg) {
  ScriptModels out;
  ModelBuilder b{index, out.warnings};
  const auto& files = index.scripts().files;

  out.app.kind = "App";
  out.app.owner = "app";
  out.app.file = "app.js";
  if (files.count("app.js")) {
    b.registration(out.app, "app.js", {"App"});
    if (!out.app.registered) out.warnings.push_back({"script", "app.js", "no App registration"});
  }

  std::set<std::string> page_files;
  for (const Page* page : pkg.pages()) {
    std::string file = page->script_path();
    page_files.insert(file);
    if (!files.count(file)) continue;
    PageModel pm;
    pm.kind = "Page";
    pm.route = page->route;
    pm.owner = page->route;
    pm.file = file;
    b.registration(pm, file, {"Page", "Component"});
    if (!pm.registered) out.warnings.push_back({"script", file, "no Page registration"});
    out.pages.push_back(std::move(pm));
  }

  for (const auto& [file, ast] : files) {
    if (file == "app.js" || page_files.count(file)) continue;
    const std::string& owner = index.owner_of_file(file);
    if (owner.empty()) continue;
    ComponentModel cm;
    cm.kind = "Component";
    cm.path = owner;
    cm.owner = owner;
    cm.file = file;
    b.registration(cm, file, {"Component"});
    out.components.push_back(std::move(cm));
  }
  index.bind_call_arguments();
  return out;
}

// ---- call graph -------------------------------------------------------------

std::string_view to_string(EdgeTag t) {
  switch (t) {
    case EdgeTag::Direct: return "direct";
    case EdgeTag::Lifecycle: return "lifecycle";
    case EdgeTag::Binding: return "binding";
    case EdgeTag::Callback: return "callback";
    case EdgeTag::Listener: return "listener";
    case EdgeTag::Argument: return "argument";
    case EdgeTag::Module: return "module";
  }
  return "?";
}

bool subapi_call(const ScriptIndex& index, const Node& call, int fn, const Taxonomy& tax, std::string& name) {
  (void)tax;
  if (call.kind != NodeKind::Call) return false;
  const Node* callee = call.kid(0);
  if (!callee || callee->kind != NodeKind::MemberAccess) return false;
  const Node* obj = callee->kid(0);
  if (obj->kind == NodeKind::Identifier && obj->name == "wx" && index.lookup(fn, "wx").scope < 0) {
    name = callee->name;
    return true;
  }
  if (obj->kind == NodeKind::MemberAccess && obj->kid(0)->kind == NodeKind::Identifier &&
      obj->kid(0)->name == "wx" && index.lookup(fn, "wx").scope < 0) {
    name = obj->name + "." + callee->name;  // wx.cloud.callFunction
    return true;
  }
  Resolved base = index.resolve(*obj, fn);
  if (base.wx_types.empty()) return false;
  name = *base.wx_types.begin() + "." + callee->name;
  return true;
}

namespace {

std::string callee_text(const Node& callee) {
  std::string d = js::dotted_name(callee);
  if (!d.empty()) return d;
  if (callee.kind == NodeKind::MemberAccess) return "<expr>." + callee.name;
  return "<" + std::string(js::to_string(callee.kind)) + ">";
}

}  // namespace

CallGraph build_call_graph(const ScriptIndex& index, const ScriptModels& models,
                           const std::vector<HandlerBinding>& bindings, const Taxonomy& tax) {
  CallGraph g;
  g.nodes = index.functions();
  g.entry = 0;
  auto edge = [&](int caller, int callee, Span site, const Node* call, EdgeTag tag, std::string detail) {
    g.edges.push_back({caller, callee, site, call, tag, std::move(detail)});
  };

  // module loading
  std::set<std::string> roots;
  if (index.module_init("app.js") >= 0) roots.insert("app.js");
  for (const auto& p : models.pages) roots.insert(p.file);
  for (const auto& c : models.components) roots.insert(c.file);
  for (const auto& f : roots) edge(0, index.module_init(f), {}, nullptr, EdgeTag::Module, f);
  for (const auto& [file, ast] : index.scripts().files) {
    for (const auto& [target, node] : index.imports(file)) {
      int caller = node->kind == NodeKind::Import ? index.module_init(file) : index.enclosing(node);
      if (caller < 0) caller = index.module_init(file);
      int callee = index.module_init(target);
      if (callee >= 0) edge(caller, callee, node->span, node, EdgeTag::Module, target);
    }
  }

  // framework-invoked lifecycle callbacks
  auto lifecycle = [&](const RegistrationModel& m) {
    for (const auto& [name, fn] : m.lifecycle_fns) edge(0, fn, {}, nullptr, EdgeTag::Lifecycle, name);
  };
  lifecycle(models.app);
  for (const auto& p : models.pages) lifecycle(p);
  for (const auto& c : models.components) lifecycle(c);

  // render-layer event bindings
  for (const auto& b : bindings) {
    const RegistrationModel* m = models.owner(b.owner);
    int target = -1;
    if (m) {
      if (auto it = m->handlers.find(b.handler); it != m->handlers.end()) target = it->second;
      else if (auto lt = m->lifecycle_fns.find(b.handler); lt != m->lifecycle_fns.end()) target = lt->second;
    }
    if (target < 0) {
      const auto& om = index.owner_methods(b.owner);
      if (auto it = om.find(b.handler); it != om.end() && !it->second.empty()) target = *it->second.begin();
    }
    if (target < 0) {
      g.unresolved_bindings.push_back(b);
      continue;
    }
    edge(0, target, b.span, nullptr, EdgeTag::Binding, b.attr);
  }

  // call sites
  for (const auto& fi : g.nodes) {
    if (fi.kind == FunctionInfo::Kind::Entry) continue;
    for (const Node* call : index.call_sites(fi.id)) {
      std::set<std::pair<int, EdgeTag>> here;
      auto add = [&](int callee, EdgeTag tag, const std::string& detail) {
        if (here.insert({callee, tag}).second) edge(fi.id, callee, call->span, call, tag, detail);
      };
      std::string api;
      if (subapi_call(index, *call, fi.id, tax, api)) {
        for (std::size_t k = 1; k < call->kids.size(); ++k) {
          const Node& arg = *call->kids[k];
          if (arg.kind == NodeKind::ObjectLiteral) {
            for (const auto& p : arg.kids) {
              if (p->kind != NodeKind::Property || !p->kid(0)) continue;
              if (p->name != "success" && p->name != "fail" && p->name != "complete") continue;
              for (int f : index.resolve(*p->kid(0), fi.id).functions) add(f, EdgeTag::Callback, p->name);
            }
          } else {
            for (int f : index.resolve(arg, fi.id).functions) add(f, EdgeTag::Listener, api);
          }
        }
        continue;
      }
      const Node* callee = call->kid(0);
      Resolved target;
      if (callee->kind == NodeKind::MemberAccess &&
          (callee->name == "call" || callee->name == "apply" || callee->name == "bind"))
        target.functions = index.resolve(*callee->kid(0), fi.id).functions;
      for (int f : index.resolve(*callee, fi.id).functions) target.functions.insert(f);
      if (target.functions.empty() && call->kind == NodeKind::Call)
        g.unresolved.push_back({fi.id, callee_text(*callee), call->span});
      for (int f : target.functions) add(f, EdgeTag::Direct, {});
      for (std::size_t k = 1; k < call->kids.size(); ++k) {
        const Node& arg = *call->kids[k];
        if (arg.kind != NodeKind::FunctionDef && arg.kind != NodeKind::Identifier &&
            arg.kind != NodeKind::MemberAccess)
          continue;
        for (int f : index.resolve(arg, fi.id).functions)
          if (!target.functions.count(f)) add(f, EdgeTag::Argument, {});
      }
    }
  }

  std::stable_sort(g.edges.begin(), g.edges.end(), [](const CallEdge& a, const CallEdge& b) {
    return std::tie(a.caller, a.site.begin, a.callee, a.tag, a.detail) <
           std::tie(b.caller, b.site.begin, b.callee, b.tag, b.detail);
  });
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    if (g.edges[k].call) g.by_call_[g.edges[k].call].push_back(k);
    g.by_caller_[g.edges[k].caller].push_back(k);
  }
  return g;
}

std::set<int> CallGraph::reachable() const {
  std::set<int> seen{entry};
  std::vector<int> stack{entry};
  while (!stack.empty()) {
    int f = stack.back();
    stack.pop_back();
    for (const CallEdge* e : out_edges(f))
      if (seen.insert(e->callee).second) stack.push_back(e->callee);
  }
  return seen;
}

std::vector<const CallEdge*> CallGraph::out_edges(int fn) const {
  std::vector<const CallEdge*> out;
  if (auto it = by_caller_.find(fn); it != by_caller_.end())
    for (auto k : it->second) out.push_back(&edges[k]);
  return out;
}

std::vector<const CallEdge*> CallGraph::edges_at(const js::Node* call) const {
  std::vector<const CallEdge*> out;
  if (auto it = by_call_.find(call); it != by_call_.end())
    for (auto k : it->second) out.push_back(&edges[k]);
  return out;
}

std::string CallGraph::to_dot() const {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  };
  std::ostringstream os;
  os << "digraph callgraph {\n";
  for (const auto& n : nodes) os << "  n" << n.id << " [label=" << quote(n.label()) << "];\n";
  for (const auto& e : edges) {
    std::string label(to_string(e.tag));
    if (!e.detail.empty()) label += ":" + e.detail;
    os << "  n" << e.caller << " -> n" << e.callee << " [label=" << quote(label) << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace spo
