#include "spo/taxonomy.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spo/text.hpp"

#ifndef SPO_DATA_DIR
#define SPO_DATA_DIR "data"
#endif

namespace spo {

using nlohmann::json;

std::string_view to_string(PrivacyCategory c) {
  switch (c) {
    case PrivacyCategory::Device: return "device";
    case PrivacyCategory::Platform: return "platform";
    case PrivacyCategory::UserInput: return "user_input";
  }
  return "device";
}

char category_suffix(PrivacyCategory c) {
  switch (c) {
    case PrivacyCategory::Device: return 'd';
    case PrivacyCategory::Platform: return 'p';
    case PrivacyCategory::UserInput: return 'u';
  }
  return 'd';
}

std::string_view to_string(CallbackStyle s) {
  switch (s) {
    case CallbackStyle::SuccessCallback: return "success_callback";
    case CallbackStyle::SyncReturn: return "sync_return";
    case CallbackStyle::EventListener: return "event_listener";
  }
  return "success_callback";
}

std::string_view to_string(SinkKind k) { return k == SinkKind::Upload ? "upload" : "request"; }

std::string_view to_string(ProtectionLevel l) {
  switch (l) {
    case ProtectionLevel::NotProtected: return "not_protected";
    case ProtectionLevel::PartiallyProtected: return "partially_protected";
    case ProtectionLevel::FullyProtected: return "fully_protected";
  }
  return "not_protected";
}

namespace {

std::string_view to_string(KeywordScope s) {
  switch (s) {
    case KeywordScope::Ui: return "ui";
    case KeywordScope::Policy: return "policy";
    case KeywordScope::Both: return "both";
  }
  return "both";
}

[[noreturn]] void fail(const std::string& msg) { throw LoadError("taxonomy: " + msg); }

std::string req_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string() || it->get<std::string>().empty())
    fail(where + ": missing or empty string field '" + key + "'");
  return it->get<std::string>();
}

PrivacyCategory parse_category(const std::string& s, const std::string& where) {
  if (s == "device") return PrivacyCategory::Device;
  if (s == "platform") return PrivacyCategory::Platform;
  if (s == "user_input") return PrivacyCategory::UserInput;
  fail(where + ": unknown category '" + s + "'");
}

CallbackStyle parse_style(const std::string& s, const std::string& where) {
  if (s == "success_callback") return CallbackStyle::SuccessCallback;
  if (s == "sync_return") return CallbackStyle::SyncReturn;
  if (s == "event_listener") return CallbackStyle::EventListener;
  fail(where + ": unknown callback style '" + s + "'");
}

KeywordScope parse_scope(const std::string& s, const std::string& where) {
  if (s == "ui") return KeywordScope::Ui;
  if (s == "policy") return KeywordScope::Policy;
  if (s == "both") return KeywordScope::Both;
  fail(where + ": unknown keyword scope '" + s + "'");
}

ProtectionLevel parse_level(const std::string& s, const std::string& where) {
  if (s == "not_protected") return ProtectionLevel::NotProtected;
  if (s == "partially_protected") return ProtectionLevel::PartiallyProtected;
  if (s == "fully_protected") return ProtectionLevel::FullyProtected;
  fail(where + ": unknown protection level '" + s + "'");
}

std::vector<std::string> string_list(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where + ": expected a list of strings");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) fail(where + ": expected a list of strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

}  // namespace

const PrivacyItem* Taxonomy::item(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &items_[it->second];
}

ItemSet Taxonomy::items_named(std::string_view name) const {
  ItemSet out;
  for (const auto& it : items_)
    if (it.name == name) out.insert(it.id);
  return out;
}

ItemSet Taxonomy::cover_by_name(const ItemSet& ids) const {
  ItemSet out;
  for (const auto& id : ids) {
    const PrivacyItem* it = item(id);
    if (!it) continue;
    out.merge(items_named(it->name));
  }
  return out;
}

const SubApiMapping* Taxonomy::resolve_subapi(std::string_view name) const {
  if (name.starts_with("wx.")) name.remove_prefix(3);
  auto find = [&](std::string_view n) -> const SubApiMapping* {
    auto it = subapis_.find(std::string(n));
    return it == subapis_.end() ? nullptr : &it->second;
  };
  if (const auto* m = find(name)) return m;
  if (name.ends_with("Sync")) {
    if (const auto* m = find(name.substr(0, name.size() - 4))) return m;
  }
  // Type.method on an object whose type is produced by a factory: fall back
  // to the bare method name (createCameraContext().takePhoto -> takePhoto).
  if (auto dot = name.rfind('.'); dot != std::string_view::npos) {
    std::string_view type = name.substr(0, dot);
    bool known_type = false;
    for (const auto& [factory, t] : factories_)
      if (t == type) known_type = true;
    if (known_type) return find(name.substr(dot + 1));
  }
  return nullptr;
}

ItemSet Taxonomy::lookup_subapi(std::string_view name) const {
  const SubApiMapping* m = resolve_subapi(name);
  return m ? m->items : ItemSet{};
}

std::optional<std::string> Taxonomy::factory_type(std::string_view subapi) const {
  if (subapi.starts_with("wx.")) subapi.remove_prefix(3);
  auto it = factories_.find(std::string(subapi));
  if (it == factories_.end()) return std::nullopt;
  return it->second;
}

const SinkApi* Taxonomy::sink(std::string_view name) const {
  if (name.starts_with("wx.")) name.remove_prefix(3);
  for (const auto& s : sinks_)
    if (s.name == name) return &s;
  return nullptr;
}

const KeywordLexicon& Taxonomy::lexicon(std::string_view locale) const {
  if (auto it = lexicons_.find(std::string(locale)); it != lexicons_.end()) return it->second;
  if (auto it = lexicons_.find("en"); it != lexicons_.end()) return it->second;
  static const KeywordLexicon empty;
  return empty;
}

std::optional<ProtectionLevel> Taxonomy::protection(std::string_view id) const {
  auto it = protection_.find(std::string(id));
  if (it == protection_.end()) return std::nullopt;
  return it->second;
}

const PolicyVocabulary& Taxonomy::vocabulary(std::string_view locale) const {
  if (auto it = vocab_.find(std::string(locale)); it != vocab_.end()) return it->second;
  if (auto it = vocab_.find("en"); it != vocab_.end()) return it->second;
  static const PolicyVocabulary empty;
  return empty;
}

Taxonomy parse_taxonomy(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("top level must be an object");

  Taxonomy tax;
  if (auto v = doc.find("schema_version"); v != doc.end()) {
    if (!v->is_number_integer()) fail("schema_version must be an integer");
    tax.schema_version_ = v->get<int>();
    if (tax.schema_version_ != 1) fail("unsupported schema_version " + std::to_string(tax.schema_version_));
  } else {
    fail("missing schema_version");
  }

  auto items = doc.find("items");
  if (items == doc.end() || !items->is_array() || items->empty()) fail("empty taxonomy");
  for (const auto& e : *items) {
    std::string where = "items[" + std::to_string(tax.items_.size()) + "]";
    PrivacyItem it;
    it.id = req_string(e, "id", where);
    it.name = req_string(e, "name", where + " (" + it.id + ")");
    it.category = parse_category(req_string(e, "category", where), where + " (" + it.id + ")");
    if (tax.index_.count(it.id)) fail("duplicate item id '" + it.id + "'");
    tax.index_.emplace(it.id, tax.items_.size());
    tax.items_.push_back(std::move(it));
  }

  auto require_item = [&](const std::string& id, const std::string& where) -> const PrivacyItem& {
    const PrivacyItem* it = tax.item(id);
    if (!it) fail(where + ": unknown item '" + id + "'");
    return *it;
  };

  if (auto m = doc.find("subapi_map"); m != doc.end()) {
    if (!m->is_array()) fail("subapi_map must be a list");
    for (const auto& e : *m) {
      SubApiMapping sm;
      sm.subapi = req_string(e, "subapi", "subapi_map entry");
      if (sm.subapi.starts_with("wx.")) sm.subapi.erase(0, 3);
      std::string where = "subapi_map '" + sm.subapi + "'";
      if (tax.subapis_.count(sm.subapi)) fail(where + ": duplicate subapi");
      auto its = e.find("items");
      if (its == e.end() || !its->is_array() || its->empty()) fail(where + ": no items");
      std::map<std::string, std::string> by_name;
      for (const auto& id : string_list(*its, where)) {
        const PrivacyItem& pi = require_item(id, where);
        if (pi.category == PrivacyCategory::UserInput)
          fail(where + ": item '" + id + "' is user-input; subAPIs map to device or platform items");
        if (auto [pos, fresh] = by_name.emplace(pi.name, id); !fresh)
          fail(where + ": duplicate mapping category conflict (" + pos->second + ", " + id + ")");
        sm.items.insert(id);
      }
      if (auto st = e.find("style"); st != e.end()) sm.style = parse_style(st->get<std::string>(), where);
      if (auto p = e.find("permission"); p != e.end()) sm.permission = p->get<std::string>();
      tax.subapis_.emplace(sm.subapi, std::move(sm));
    }
  }

  if (auto f = doc.find("factories"); f != doc.end()) {
    if (!f->is_object()) fail("factories must be an object");
    for (const auto& [k, v] : f->items()) {
      if (!v.is_string()) fail("factories '" + k + "': type must be a string");
      tax.factories_.emplace(k, v.get<std::string>());
    }
  }

  if (auto kw = doc.find("keywords"); kw != doc.end()) {
    if (!kw->is_object()) fail("keywords must be an object keyed by locale");
    for (const auto& [locale, list] : kw->items()) {
      KeywordLexicon lex;
      lex.locale = locale;
      if (!list.is_array()) fail("keywords." + locale + " must be a list");
      for (const auto& e : list) {
        KeywordEntry ke;
        ke.keyword = req_string(e, "keyword", "keywords." + locale);
        std::string where = "keywords." + locale + " '" + ke.keyword + "'";
        ke.normalized = normalize_text(ke.keyword);
        if (ke.normalized.empty()) fail(where + ": blank keyword");
        ke.item = req_string(e, "item", where);
        const PrivacyItem& pi = require_item(ke.item, where);
        if (auto s = e.find("scope"); s != e.end()) ke.scope = parse_scope(s->get<std::string>(), where);
        if (auto x = e.find("exact"); x != e.end()) ke.exact = x->get<bool>();
        if (ke.scope != KeywordScope::Policy && pi.category != PrivacyCategory::UserInput)
          fail(where + ": UI keywords must map to user-input items");
        lex.entries.push_back(std::move(ke));
      }
      tax.lexicons_.emplace(locale, std::move(lex));
    }
  }

  auto sinks = doc.find("sinks");
  if (sinks != doc.end()) {
    if (!sinks->is_array()) fail("sinks must be a list");
    for (const auto& e : *sinks) {
      SinkApi s;
      s.name = req_string(e, "name", "sinks entry");
      if (s.name.starts_with("wx.")) s.name.erase(0, 3);
      std::string kind = req_string(e, "kind", "sinks '" + s.name + "'");
      if (kind == "upload") s.kind = SinkKind::Upload;
      else if (kind == "request") s.kind = SinkKind::Request;
      else fail("sinks '" + s.name + "': unknown kind '" + kind + "'");
      if (auto p = e.find("payload"); p != e.end()) s.payload = string_list(*p, "sinks '" + s.name + "'");
      for (const auto& o : tax.sinks_)
        if (o.name == s.name) fail("sinks '" + s.name + "': duplicate sink");
      tax.sinks_.push_back(std::move(s));
    }
  }

  if (auto pl = doc.find("protection_levels"); pl != doc.end()) {
    if (!pl->is_array()) fail("protection_levels must be a list");
    for (const auto& e : *pl) {
      std::string id = req_string(e, "item", "protection_levels entry");
      std::string where = "protection_levels '" + id + "'";
      require_item(id, where);
      ProtectionLevel lvl = parse_level(req_string(e, "level", where), where);
      if (!tax.protection_.emplace(id, lvl).second) fail(where + ": more than one level");
    }
  }

  auto read_lists = [&](const char* key, auto member) {
    auto node = doc.find(key);
    if (node == doc.end()) return;
    if (!node->is_object()) fail(std::string(key) + " must be an object keyed by locale");
    for (const auto& [locale, list] : node->items())
      tax.vocab_[locale].*member = string_list(list, std::string(key) + "." + locale);
  };
  read_lists("policy_verbs", &PolicyVocabulary::verbs);
  read_lists("negation_cues", &PolicyVocabulary::negations);
  read_lists("contrast_conjunctions", &PolicyVocabulary::contrasts);
  read_lists("policy_indicators", &PolicyVocabulary::indicators);

  return tax;
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("taxonomy: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_taxonomy(ss.str());
}

std::string serialize_taxonomy(const Taxonomy& tax) {
  json doc = json::object();
  doc["schema_version"] = tax.schema_version();
  json items = json::array();
  for (const auto& it : tax.items())
    items.push_back({{"id", it.id}, {"name", it.name}, {"category", to_string(it.category)}});
  doc["items"] = std::move(items);

  json subs = json::array();
  for (const auto& [name, m] : tax.subapis()) {
    json e = {{"subapi", name}, {"items", m.items}, {"style", to_string(m.style)}};
    if (!m.permission.empty()) e["permission"] = m.permission;
    subs.push_back(std::move(e));
  }
  doc["subapi_map"] = std::move(subs);
  doc["factories"] = tax.factories();

  json kws = json::object();
  for (const auto& [locale, lex] : tax.lexicons()) {
    json list = json::array();
    for (const auto& e : lex.entries) {
      json j = {{"keyword", e.keyword}, {"item", e.item}, {"scope", to_string(e.scope)}};
      if (e.exact) j["exact"] = true;
      list.push_back(std::move(j));
    }
    kws[locale] = std::move(list);
  }
  doc["keywords"] = std::move(kws);

  json sinks = json::array();
  for (const auto& s : tax.sinks())
    sinks.push_back({{"name", s.name}, {"kind", to_string(s.kind)}, {"payload", s.payload}});
  doc["sinks"] = std::move(sinks);

  json levels = json::array();
  for (const auto& [id, lvl] : tax.protection_levels())
    levels.push_back({{"item", id}, {"level", to_string(lvl)}});
  doc["protection_levels"] = std::move(levels);

  json verbs = json::object(), neg = json::object(), con = json::object(), ind = json::object();
  for (const auto& [locale, v] : tax.vocabularies()) {
    verbs[locale] = v.verbs;
    neg[locale] = v.negations;
    con[locale] = v.contrasts;
    ind[locale] = v.indicators;
  }
  doc["policy_verbs"] = std::move(verbs);
  doc["negation_cues"] = std::move(neg);
  doc["contrast_conjunctions"] = std::move(con);
  doc["policy_indicators"] = std::move(ind);
  return doc.dump(2) + "\n";
}

std::filesystem::path default_taxonomy_path() {
  if (const char* env = std::getenv("SPO_TAXONOMY"); env && *env) return env;
  return std::filesystem::path(SPO_DATA_DIR) / "taxonomy.json";
}

}  // namespace spo
