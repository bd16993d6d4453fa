#include "spo/render.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>

#include <json.hpp>

#include "spo/text.hpp"

namespace spo {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, NativeKind, std::less<>> kNatives = {
    {"editor", NativeKind::Input},         {"input", NativeKind::Input},
    {"textarea", NativeKind::Input},       {"checkbox", NativeKind::Process},
    {"checkbox-group", NativeKind::Process}, {"picker", NativeKind::Process},
    {"picker-view", NativeKind::Process},  {"radio", NativeKind::Process},
    {"radio-group", NativeKind::Process},  {"slider", NativeKind::Process},
    {"switch", NativeKind::Process},       {"form", NativeKind::Process},
};

const std::set<std::string> kInputPatterns = {"bindinput", "bindconfirm"};
const std::set<std::string> kProcessPatterns = {"bindchange", "bindsubmit", "bindcolumnchange", "bindchanging"};

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

bool dynamic(std::string_view s) { return s.find("{{") != std::string_view::npos; }

std::string dir_of(const std::string& path) { return fs::path(path).parent_path().generic_string(); }

std::map<std::string, std::string> using_components(const std::string& json_text) {
  std::map<std::string, std::string> out;
  try {
    auto doc = nlohmann::json::parse(json_text);
    if (auto it = doc.find("usingComponents"); doc.is_object() && it != doc.end() && it->is_object())
      for (auto& [tag, path] : it->items())
        if (path.is_string()) out[tag] = path.get<std::string>();
  } catch (const std::exception&) {
  }
  return out;
}

bool component_exists(const SubAppPackage& pkg, const std::string& p) {
  return pkg.files.count(p + ".wxml") || pkg.files.count(p + ".js") || pkg.files.count(p + ".json");
}

std::string resolve_component_path(const SubAppPackage& pkg, const std::string& from_dir, const std::string& written) {
  if (written.empty() || written.starts_with("plugin://") || written.starts_with("plugin-private://")) return {};
  std::vector<fs::path> bases;
  if (written.front() == '/') {
    bases.emplace_back(written.substr(1));
  } else {
    bases.push_back(fs::path(from_dir) / written);
    if (!written.starts_with(".")) {
      bases.emplace_back(written);
      bases.push_back(fs::path("miniprogram_npm") / written);
    }
  }
  for (const auto& b : bases) {
    std::string s = b.lexically_normal().generic_string();
    if (s.starts_with("..")) continue;
    for (const auto& cand : {s, s + "/index"})
      if (component_exists(pkg, cand)) return cand;
  }
  return {};
}

std::vector<std::string> option_list(const std::string& range,
                                     const std::map<std::string, std::vector<std::string>>* data_strings) {
  std::vector<std::string> out;
  if (range.empty()) return out;
  auto open = range.find("{{");
  if (open == std::string::npos) {
    std::size_t start = 0;
    while (start <= range.size()) {
      auto comma = range.find(',', start);
      std::string part = range.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!blank(part)) out.push_back(part);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }
  auto close = range.find("}}", open);
  std::string expr = range.substr(open + 2, close == std::string::npos ? std::string::npos : close - open - 2);
  auto b = expr.find_first_not_of(" \t");
  auto e = expr.find_last_not_of(" \t");
  expr = b == std::string::npos ? "" : expr.substr(b, e - b + 1);
  if (expr.starts_with("[")) {
    for (std::size_t i = 0; i < expr.size(); ++i) {
      char q = expr[i];
      if (q != '\'' && q != '"') continue;
      auto end = expr.find(q, i + 1);
      if (end == std::string::npos) break;
      out.push_back(expr.substr(i + 1, end - i - 1));
      i = end;
    }
    return out;
  }
  if (data_strings)
    if (auto it = data_strings->find(expr); it != data_strings->end()) return it->second;
  return out;
}

// Depth-first levelling with cycle detection over the custom-component graph.
struct Leveller {
  const std::map<std::string, std::set<std::string>>& custom_deps;
  const std::map<std::string, std::set<std::string>>& natives;
  std::set<std::string> cyclic;
  std::map<std::string, int> state;  // 1 visiting, 2 done
  std::map<std::string, ComponentDef> defs;
  std::vector<std::string> stack;

  void find_cycles(const std::string& c) {
    state[c] = 1;
    stack.push_back(c);
    if (auto it = custom_deps.find(c); it != custom_deps.end()) {
      for (const auto& d : it->second) {
        if (state[d] == 1) {
          auto from = std::find(stack.begin(), stack.end(), d);
          cyclic.insert(from, stack.end());
        } else if (state[d] == 0) {
          find_cycles(d);
        }
      }
    }
    stack.pop_back();
    state[c] = 2;
  }

  // Returns the definition of a UIP component, or null.
  const ComponentDef* level(const std::string& c) {
    if (cyclic.count(c)) return nullptr;
    if (auto it = defs.find(c); it != defs.end()) return it->second.natives.empty() ? nullptr : &it->second;
    ComponentDef def;
    def.name = c;
    def.level = 1;
    if (auto it = natives.find(c); it != natives.end()) {
      for (const auto& tag : it->second) {
        def.natives.insert(tag);
        const auto& pats = binding_patterns(*native_kind(tag));
        def.input_bindings.insert(pats.begin(), pats.end());
      }
    }
    if (auto it = custom_deps.find(c); it != custom_deps.end()) {
      for (const auto& d : it->second) {
        const ComponentDef* dep = level(d);
        if (!dep) continue;
        def.depends_on.insert(d);
        def.level = std::max(def.level, dep->level + 1);
        def.natives.insert(dep->natives.begin(), dep->natives.end());
        def.input_bindings.insert(dep->input_bindings.begin(), dep->input_bindings.end());
      }
    }
    auto& stored = defs[c] = std::move(def);
    return stored.natives.empty() ? nullptr : &stored;
  }
};

ItemSet match_label(const std::string& text, const KeywordLexicon& lexicon) {
  if (blank(text)) return {};
  return match_keywords(strip_mustache(text), lexicon, KeywordScope::Ui);
}

std::string node_text(const MarkupDoc& doc, int i) {
  const auto& n = doc.at(i);
  return n.is_element() ? doc.text_content(i) : n.text;
}

}  // namespace

const NativeKind* native_kind(std::string_view tag) {
  auto it = kNatives.find(tag);
  return it == kNatives.end() ? nullptr : &it->second;
}

const std::set<std::string>& binding_patterns(NativeKind kind) {
  return kind == NativeKind::Input ? kInputPatterns : kProcessPatterns;
}

std::string normalize_binding(std::string_view attr) {
  std::string a(attr);
  for (const char* prefix : {"capture-bind:", "capture-catch:", "mut-bind:", "bind:", "catch:"})
    if (a.starts_with(prefix)) return "bind" + a.substr(std::string_view(prefix).size());
  if (a.starts_with("bind") && a.size() > 4) return a;
  if (a.starts_with("catch") && a.size() > 5) return "bind" + a.substr(5);
  return {};
}

const ComponentDef* ComponentResolution::find(std::string_view name) const {
  for (const auto& c : components)
    if (c.name == name) return &c;
  return nullptr;
}

ComponentResolution resolve_components(const SubAppPackage& pkg) {
  ComponentResolution out;
  auto declare = [&](const std::string& owner, const std::string& from_dir,
                     const std::map<std::string, std::string>& written, std::vector<std::string>& queue) {
    auto& tags = out.tag_maps[owner];
    for (const auto& [tag, path] : written) {
      std::string resolved = resolve_component_path(pkg, from_dir, path);
      if (resolved.empty()) {
        out.warnings.push_back({"render", owner, "component '" + tag + "' not found: " + path});
        continue;
      }
      tags[tag] = resolved;
      if (out.all.insert(resolved).second) queue.push_back(resolved);
    }
  };

  std::vector<std::string> queue;
  std::map<std::string, std::string> global;
  if (auto it = pkg.files.find("app.json"); it != pkg.files.end()) global = using_components(it->second);
  std::map<std::string, std::string> global_tags;
  {
    std::vector<std::string> q;
    declare("app", "", global, q);
    global_tags = out.tag_maps["app"];
    out.tag_maps.erase("app");
    queue.insert(queue.end(), q.begin(), q.end());
  }
  for (const Page* page : pkg.pages()) {
    out.tag_maps[page->route] = global_tags;
    declare(page->route, dir_of(page->route), page->config.using_components, queue);
  }
  for (std::size_t k = 0; k < queue.size(); ++k) {
    std::string c = queue[k];
    out.tag_maps[c] = global_tags;
    if (auto it = pkg.files.find(c + ".json"); it != pkg.files.end())
      declare(c, dir_of(c), using_components(it->second), queue);
  }

  std::map<std::string, std::set<std::string>> custom_deps, natives;
  for (const auto& c : out.all) {
    auto it = pkg.files.find(c + ".wxml");
    if (it == pkg.files.end()) continue;
    MarkupDoc doc;
    try {
      doc = parse_markup(it->second);
    } catch (const ParseError& e) {
      out.warnings.push_back({"render", c + ".wxml", std::string("markup skipped: ") + e.what()});
      continue;
    }
    const auto& tags = out.tag_maps[c];
    for (int el : doc.elements()) {
      const auto& tag = doc.at(el).tag;
      if (auto t = tags.find(tag); t != tags.end()) custom_deps[c].insert(t->second);
      else if (native_kind(tag)) natives[c].insert(tag);
    }
  }

  Leveller lv{custom_deps, natives, {}, {}, {}, {}};
  for (const auto& c : out.all)
    if (!lv.state[c]) lv.find_cycles(c);
  for (const auto& c : lv.cyclic) out.warnings.push_back({"render", c, "component dependency cycle; component dropped"});
  for (const auto& c : out.all)
    if (const ComponentDef* d = lv.level(c)) out.components.push_back(*d);
  std::sort(out.components.begin(), out.components.end(),
            [](const ComponentDef& a, const ComponentDef& b) { return std::tie(a.level, a.name) < std::tie(b.level, b.name); });
  return out;
}

std::vector<HandlerBinding> extract_bindings(const std::string& owner, const MarkupDoc& doc) {
  std::vector<HandlerBinding> out;
  for (int el : doc.elements()) {
    const auto& node = doc.at(el);
    for (const auto& a : node.attrs) {
      if (normalize_binding(a.name).empty() || blank(a.value) || dynamic(a.value)) continue;
      std::string handler = a.value;
      handler.erase(0, handler.find_first_not_of(" \t"));
      handler.erase(handler.find_last_not_of(" \t") + 1);
      out.push_back({owner, a.name, handler, node.span});
    }
  }
  return out;
}

std::vector<UipSource> extract_uip(const std::string& owner, const MarkupDoc& doc, const UipContext& ctx,
                                   Diagnostics* warnings) {
  std::vector<UipSource> out;
  const std::map<std::string, std::string>* tags = nullptr;
  if (ctx.components)
    if (auto it = ctx.components->tag_maps.find(owner); it != ctx.components->tag_maps.end()) tags = &it->second;

  auto custom_def = [&](const MarkupNode& n) -> const ComponentDef* {
    if (!tags || !ctx.components) return nullptr;
    auto it = tags->find(n.tag);
    return it == tags->end() ? nullptr : ctx.components->find(it->second);
  };
  auto uip_capable = [&](const MarkupNode& n) { return n.is_element() && (native_kind(n.tag) || custom_def(n)); };
  std::function<bool(int)> holds_uip = [&](int id) {
    const auto& n = doc.at(id);
    if (uip_capable(n)) return true;
    return std::any_of(n.children.begin(), n.children.end(), holds_uip);
  };
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back({"render", owner, msg});
  };

  struct Label {
    ItemSet items;
    std::string source;
    std::string text;
  };
  auto try_label = [&](Label& l, const std::string& text, const char* source) {
    if (!l.items.empty() || blank(text)) return;
    l.items = match_label(text, *ctx.lexicon);
    if (!l.items.empty()) {
      l.source = source;
      l.text = strip_mustache(text);
    }
  };
  // nearest preceding sibling carrying text, stopping at another input element
  auto preceding_text = [&](int node) -> std::string {
    if (node <= 0) return {};
    const auto& parent = doc.at(doc.at(node).parent);
    auto pos = std::find(parent.children.begin(), parent.children.end(), node);
    while (pos != parent.children.begin()) {
      --pos;
      const auto& sib = doc.at(*pos);
      if (holds_uip(*pos)) return {};
      std::string t = node_text(doc, *pos);
      if (!blank(strip_mustache(t))) return t;
    }
    return {};
  };

  for (int el : doc.elements()) {
    const auto& node = doc.at(el);
    if (node.tag == "form") continue;
    const ComponentDef* custom = custom_def(node);
    const NativeKind* kind = native_kind(node.tag);
    if (!custom && !kind) continue;

    std::string form_handler;
    for (int a = node.parent; a > 0; a = doc.at(a).parent) {
      const auto& anc = doc.at(a);
      if (anc.tag != "form") continue;
      for (const auto& attr : anc.attrs)
        if (normalize_binding(attr.name) == "bindsubmit" && !blank(attr.value) && !dynamic(attr.value))
          form_handler = attr.value;
      break;
    }

    std::string handler, binding_attr;
    const std::set<std::string>& patterns = custom ? custom->input_bindings : binding_patterns(*kind);
    for (const auto& attr : node.attrs) {
      std::string norm = normalize_binding(attr.name);
      if (norm.empty() || !patterns.count(norm)) continue;
      if (blank(attr.value)) {
        warn("empty handler for " + attr.name + " on <" + node.tag + "> at line " + std::to_string(node.span.line));
        continue;
      }
      if (dynamic(attr.value)) {
        warn("dynamic handler for " + attr.name + " on <" + node.tag + "> at line " + std::to_string(node.span.line));
        continue;
      }
      handler = attr.value;
      binding_attr = attr.name;
      break;
    }
    if (handler.empty() && form_handler.empty()) continue;

    Label label;
    for (const char* a : {"placeholder", "label", "title", "aria-label"})
      if (const std::string* v = node.attr(a)) try_label(label, *v, "attribute");
    try_label(label, preceding_text(el), "sibling");
    for (int a = node.parent; a > 0 && label.items.empty(); a = doc.at(a).parent)
      if (doc.at(a).tag == "label") try_label(label, doc.text_content(a), "label");
    for (int a = node.parent, up = 0; a > 0 && up < 2 && label.items.empty(); a = doc.at(a).parent, ++up)
      try_label(label, preceding_text(a), "heading");
    try_label(label, doc.text_content(el), "content");
    {
      std::string opts;
      if (const std::string* mode = node.attr("mode")) opts += *mode + " ";
      if (const std::string* range = node.attr("range"))
        for (const auto& o : option_list(*range, ctx.data_strings)) opts += o + ", ";
      if (const std::string* v = node.attr("value"); v && (node.tag == "radio" || node.tag == "checkbox"))
        opts += *v;
      try_label(label, opts, "options");
    }
    if (label.items.empty() && custom && ctx.intrinsic)
      if (auto it = ctx.intrinsic->find(custom->name); it != ctx.intrinsic->end() && !it->second.empty()) {
        label.items = it->second;
        label.source = "component";
      }
    if (label.items.empty()) continue;

    UipSource src;
    src.page_route = owner;
    src.span = node.span;
    src.items = label.items;
    src.handler_name = handler.empty() ? form_handler : handler;
    src.binding_attr = handler.empty() ? "bindsubmit" : binding_attr;
    src.tag = node.tag;
    src.label_source = label.source;
    src.label_text = label.text;
    src.form_handler = form_handler;
    out.push_back(std::move(src));
  }
  return out;
}

std::vector<UipSource> extract_uip(const Page& page, const ComponentResolution& comps, const KeywordLexicon& lexicon,
                                   const RegistrationModel* model, Diagnostics* warnings) {
  MarkupDoc doc;
  try {
    doc = parse_markup(page.render_doc);
  } catch (const ParseError& e) {
    if (warnings) warnings->push_back({"render", page.route, std::string("page excluded: ") + e.what()});
    return {};
  }
  UipContext ctx{&comps, &lexicon, model ? &model->data_strings : nullptr, nullptr};
  return extract_uip(page.route, doc, ctx, warnings);
}

RenderAnalysis analyze_render(const SubAppPackage& pkg, const ScriptModels* models, const KeywordLexicon& lexicon) {
  RenderAnalysis out;
  out.components = resolve_components(pkg);
  out.warnings = out.components.warnings;
  std::map<std::string, ItemSet> intrinsic;

  auto run = [&](const std::string& owner, const std::string& file, const std::string& src) {
    MarkupDoc doc;
    try {
      doc = parse_markup(src);
    } catch (const ParseError& e) {
      out.warnings.push_back({"render", file, std::string("excluded from UIP analysis: ") + e.what()});
      return;
    }
    for (const auto& r : doc.repairs) out.warnings.push_back({"markup", file, r});
    auto b = extract_bindings(owner, doc);
    out.bindings.insert(out.bindings.end(), b.begin(), b.end());
    const RegistrationModel* model = models ? models->owner(owner) : nullptr;
    UipContext ctx{&out.components, &lexicon, model ? &model->data_strings : nullptr, &intrinsic};
    auto uips = extract_uip(owner, doc, ctx, &out.warnings);
    if (out.components.all.count(owner)) {
      auto& mine = intrinsic[owner];
      for (const auto& u : uips) mine.insert(u.items.begin(), u.items.end());
    }
    out.uips.insert(out.uips.end(), uips.begin(), uips.end());
  };

  // UIP components bottom-up so that intrinsic items of lower levels are known
  std::set<std::string> done;
  for (const auto& c : out.components.components) {
    if (auto it = pkg.files.find(c.name + ".wxml"); it != pkg.files.end()) run(c.name, it->first, it->second);
    done.insert(c.name);
  }
  for (const auto& c : out.components.all) {
    if (done.count(c)) continue;
    if (auto it = pkg.files.find(c + ".wxml"); it != pkg.files.end()) run(c, it->first, it->second);
  }
  for (const Page* page : pkg.pages()) run(page->route, page->markup_path(), page->render_doc);
  return out;
}

}  // namespace spo
