#include "spo/package.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spo/markup.hpp"
#include "spo/text.hpp"

namespace spo {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::set<std::string> kTextExtensions = {".js", ".wxml", ".json", ".wxs", ".txt", ".html", ".htm", ".md", ".wxss"};
const std::set<std::string> kSizedExtensions = {".js", ".wxml", ".json"};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw LoadError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string clean_route(std::string r) {
  while (!r.empty() && r.front() == '/') r.erase(r.begin());
  for (const char* ext : {".js", ".wxml", ".json"}) {
    std::string e(ext);
    if (r.size() > e.size() && r.ends_with(e)) r.resize(r.size() - e.size());
  }
  return r;
}

std::string clean_root(std::string r) {
  while (!r.empty() && r.front() == '/') r.erase(r.begin());
  while (!r.empty() && r.back() == '/') r.pop_back();
  return r;
}

PageConfig parse_config(const std::string& text) {
  PageConfig cfg;
  auto doc = json::parse(text);
  if (!doc.is_object()) throw std::runtime_error("configuration is not an object");
  if (auto it = doc.find("usingComponents"); it != doc.end() && it->is_object())
    for (auto& [tag, path] : it->items())
      if (path.is_string()) cfg.using_components[tag] = path.get<std::string>();
  if (auto it = doc.find("component"); it != doc.end() && it->is_boolean()) cfg.is_component = it->get<bool>();
  return cfg;
}

std::vector<std::string> string_list(const json& v) {
  std::vector<std::string> out;
  if (!v.is_array()) return out;
  for (const auto& e : v)
    if (e.is_string()) out.push_back(e.get<std::string>());
  return out;
}

}  // namespace

std::string_view to_string(PolicySource s) {
  switch (s) {
    case PolicySource::ExternalFile: return "external_file";
    case PolicySource::InPackageAsset: return "in_package_asset";
    case PolicySource::PageText: return "page_text";
    case PolicySource::RemoteUrl: return "remote_url";
  }
  return "?";
}

std::string_view to_string(PolicyStatus s) {
  switch (s) {
    case PolicyStatus::Valid: return "valid";
    case PolicyStatus::Invalid: return "invalid";
    case PolicyStatus::Missing: return "missing";
  }
  return "?";
}

PolicyStatus policy_status(const std::vector<PolicyText>& policies) {
  if (policies.empty()) return PolicyStatus::Missing;
  for (const auto& p : policies)
    if (p.valid) return PolicyStatus::Valid;
  return PolicyStatus::Invalid;
}

std::vector<const Page*> SubAppPackage::pages() const {
  std::vector<const Page*> out;
  for (const auto& p : main_pkg.pages) out.push_back(&p);
  for (const auto& sp : sub_pkgs)
    for (const auto& p : sp.pages) out.push_back(&p);
  return out;
}

const Page* SubAppPackage::page(std::string_view route) const {
  for (const Page* p : pages())
    if (p->route == route) return p;
  return nullptr;
}

const Page* SubAppPackage::entry_page() const {
  for (const Page* p : pages())
    if (p->is_entry) return p;
  return nullptr;
}

std::uint64_t SubAppPackage::byte_size() const {
  std::uint64_t total = main_pkg.byte_size;
  for (const auto& sp : sub_pkgs) total += sp.byte_size;
  return total;
}

SubAppPackage load_package(const fs::path& dir_in) {
  fs::path dir = dir_in.lexically_normal();
  if (dir.filename().empty()) dir = dir.parent_path();
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw LoadError("not a directory: " + dir.string());
  if (!fs::is_regular_file(dir / "app.json", ec)) throw LoadError("missing app.json in " + dir.string());

  SubAppPackage pkg;
  pkg.appid = dir.filename().string();
  pkg.dir = dir;
  if (pkg.appid.empty()) throw LoadError("empty appid for " + dir.string());

  json app;
  try {
    app = json::parse(read_file(dir / "app.json"));
  } catch (const json::exception& e) {
    throw LoadError("app.json: " + std::string(e.what()));
  }
  if (!app.is_object()) throw LoadError("app.json: not an object");
  try {
    pkg.app_config = parse_config(app.dump());
  } catch (const std::exception&) {
  }

  if (fs::is_regular_file(dir / "meta.json", ec)) {
    try {
      auto meta = json::parse(read_file(dir / "meta.json"));
      pkg.meta.developer = meta.value("developer", "");
      pkg.meta.category = meta.value("category", "");
      if (auto it = meta.find("recently_used"); it != meta.end() && it->is_number_integer() && it->get<long long>() >= 0)
        pkg.meta.recently_used = it->get<std::uint64_t>();
    } catch (const std::exception& e) {
      pkg.warnings.push_back({"ingest", "meta.json", std::string("ignored: ") + e.what()});
    }
  }
  if (fs::is_regular_file(dir / "policy.txt", ec)) pkg.external_policy = read_file(dir / "policy.txt");

  std::vector<fs::path> found;
  for (auto it = fs::recursive_directory_iterator(dir, fs::directory_options::skip_permission_denied, ec);
       it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) break;
    if (it->is_regular_file(ec)) found.push_back(it->path());
  }
  std::sort(found.begin(), found.end());
  for (const auto& p : found) {
    std::string rel = p.lexically_relative(dir).generic_string();
    if (rel == "meta.json" || rel == "policy.txt") continue;
    if (!kTextExtensions.count(p.extension().string())) continue;
    pkg.files[rel] = read_file(p);
  }
  if (auto it = pkg.files.find("app.js"); it != pkg.files.end()) pkg.app_script = it->second;

  struct Declared {
    std::string root;
    std::vector<std::string> routes;
  };
  std::vector<Declared> declared{{"", string_list(app.value("pages", json::array()))}};
  for (const char* key : {"subpackages", "subPackages"}) {
    auto it = app.find(key);
    if (it == app.end() || !it->is_array()) continue;
    for (const auto& sp : *it) {
      if (!sp.is_object() || !sp.contains("root") || !sp["root"].is_string()) {
        pkg.warnings.push_back({"ingest", "app.json", "sub-package entry without root ignored"});
        continue;
      }
      declared.push_back({clean_root(sp["root"].get<std::string>()), string_list(sp.value("pages", json::array()))});
    }
  }

  std::set<std::string> seen;
  for (std::size_t k = 0; k < declared.size(); ++k) {
    CodePackage cp;
    cp.root_path = declared[k].root;
    for (const auto& raw : declared[k].routes) {
      std::string route = clean_route(raw);
      if (!cp.root_path.empty()) route = cp.root_path + "/" + route;
      if (route.empty()) continue;
      if (!seen.insert(route).second) throw LoadError("duplicate route '" + route + "'");
      auto js = pkg.files.find(route + ".js");
      if (js == pkg.files.end()) {
        pkg.warnings.push_back({"ingest", route, "page script missing; page skipped"});
        continue;
      }
      Page page;
      page.route = route;
      page.logic_src = js->second;
      if (auto m = pkg.files.find(route + ".wxml"); m != pkg.files.end()) page.render_doc = m->second;
      else pkg.warnings.push_back({"ingest", route, "page markup missing"});
      if (auto c = pkg.files.find(route + ".json"); c != pkg.files.end()) {
        try {
          page.config = parse_config(c->second);
        } catch (const std::exception& e) {
          pkg.warnings.push_back({"ingest", route + ".json", std::string("configuration ignored: ") + e.what()});
        }
      }
      cp.config_files[route] = page.config;
      cp.pages.push_back(std::move(page));
    }
    if (k == 0) pkg.main_pkg = std::move(cp);
    else pkg.sub_pkgs.push_back(std::move(cp));
  }

  for (const auto& [rel, content] : pkg.files) {
    if (!kSizedExtensions.count(fs::path(rel).extension().string())) continue;
    CodePackage* owner = &pkg.main_pkg;
    for (auto& sp : pkg.sub_pkgs)
      if (!sp.root_path.empty() && rel.starts_with(sp.root_path + "/")) owner = &sp;
    owner->byte_size += content.size();
  }

  std::vector<Page*> all;
  for (auto& p : pkg.main_pkg.pages) all.push_back(&p);
  for (auto& sp : pkg.sub_pkgs)
    for (auto& p : sp.pages) all.push_back(&p);
  if (all.empty()) throw LoadError("no loadable pages in " + dir.string());
  std::string entry = clean_route(app.value("entryPagePath", std::string()));
  auto chosen = std::find_if(all.begin(), all.end(), [&](const Page* p) { return p->route == entry; });
  (chosen == all.end() ? all.front() : *chosen)->is_entry = true;
  return pkg;
}

// ---- policy location --------------------------------------------------------

std::size_t policy_length(std::string_view text) {
  auto b = text.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return 0;
  auto e = text.find_last_not_of(" \t\r\n");
  return utf8_codepoints(text.substr(b, e - b + 1)).size();
}

bool policy_valid(std::string_view text, std::size_t min_length) {
  return !text.empty() && policy_length(text) >= min_length;
}

namespace {

std::string doc_text(const MarkupDoc& doc) {
  std::string out;
  for (std::size_t i = 1; i < doc.nodes.size(); ++i) {
    const auto& n = doc.nodes[i];
    if (n.is_element()) continue;
    // skip script bodies
    const auto& parent = doc.at(n.parent);
    if (parent.tag == "wxs" || parent.tag == "script" || parent.tag == "style") continue;
    std::string t = strip_mustache(n.text);
    if (t.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    if (!out.empty()) out += '\n';
    out += t;
  }
  return out;
}

std::string asset_text(const std::string& path, const std::string& content) {
  auto ext = fs::path(path).extension().string();
  if (ext == ".html" || ext == ".htm" || ext == ".wxml") {
    try {
      return doc_text(parse_markup(content));
    } catch (const ParseError&) {
      return {};
    }
  }
  return content;
}

bool has_indicator(const std::string& text, const std::vector<std::string>& indicators) {
  if (text.empty()) return false;
  std::string norm = normalize_text(text);
  for (const auto& ind : indicators)
    if (norm.find(normalize_text(ind)) != std::string::npos) return true;
  return false;
}

std::string link_of(const MarkupDoc& doc, int el) {
  static const char* kLinkAttrs[] = {"url", "href", "src", "data-url", "data-href", "data-src", "data-link"};
  int cur = el;
  for (int up = 0; up < 3 && cur > 0; ++up, cur = doc.at(cur).parent) {
    for (const char* a : kLinkAttrs) {
      const std::string* v = doc.at(cur).attr(a);
      if (v && !v->empty() && v->find("{{") == std::string::npos) return *v;
    }
  }
  return {};
}

}  // namespace

std::vector<PolicyText> locate_policies(const SubAppPackage& pkg, const PolicyVocabulary& vocab,
                                        const std::optional<fs::path>& external, const PolicyLocateOptions& opts) {
  std::vector<PolicyText> out;
  auto make = [&](PolicySource src, std::string text, std::string origin) {
    PolicyText p{src, std::move(text), false, std::move(origin)};
    p.valid = policy_valid(p.text, opts.min_length);
    for (const auto& q : out)
      if (q.source == p.source && q.origin == p.origin) return;
    out.push_back(std::move(p));
  };

  if (external) {
    std::string text;
    try {
      text = read_file(*external);
    } catch (const LoadError&) {
    }
    make(PolicySource::ExternalFile, std::move(text), external->string());
    return out;
  }
  if (pkg.external_policy) {
    make(PolicySource::ExternalFile, *pkg.external_policy, "policy.txt");
    return out;
  }

  for (const Page* page : pkg.pages()) {
    MarkupDoc doc;
    try {
      doc = parse_markup(page->render_doc);
    } catch (const ParseError&) {
      continue;
    }
    bool indicated = false, linked = false;
    for (int el : doc.elements()) {
      const auto& node = doc.at(el);
      if (node.tag == "wxs" || node.tag == "script") continue;
      std::string own;
      for (int c : node.children)
        if (!doc.at(c).is_element()) own += doc.at(c).text + " ";
      for (const auto& a : node.attrs)
        if (!a.name.starts_with("bind") && !a.name.starts_with("catch")) own += a.value + " ";
      if (!has_indicator(own, vocab.indicators)) continue;
      indicated = true;
      std::string link = link_of(doc, el);
      if (link.empty()) continue;
      linked = true;
      auto cut = link.find_first_of("?#");
      std::string target = link.substr(0, cut);
      if (link.starts_with("http://") || link.starts_with("https://")) {
        std::string text;
        if (opts.fetch_remote && opts.retriever)
          if (auto fetched = opts.retriever(link)) text = asset_text(target, *fetched);
        make(PolicySource::RemoteUrl, std::move(text), link);
        continue;
      }
      fs::path resolved = target.starts_with("/") ? fs::path(target.substr(1))
                                                  : fs::path(page->route).parent_path() / target;
      std::string rel = resolved.lexically_normal().generic_string();
      if (const Page* tp = pkg.page(clean_route(rel))) {
        try {
          make(PolicySource::PageText, doc_text(parse_markup(tp->render_doc)), tp->route);
        } catch (const ParseError&) {
          make(PolicySource::PageText, "", tp->route);
        }
      } else if (auto f = pkg.files.find(rel); f != pkg.files.end()) {
        make(PolicySource::InPackageAsset, asset_text(rel, f->second), rel);
      } else {
        make(PolicySource::InPackageAsset, "", rel);
      }
    }
    if (indicated && !linked) make(PolicySource::PageText, doc_text(doc), page->route);
  }
  return out;
}

}  // namespace spo
