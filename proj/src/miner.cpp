#include "spo/miner.hpp"

#include <algorithm>
#include <filesystem>

#include "spo/text.hpp"

namespace spo {

void ClusterConfig::validate() const {
  auto unit = [](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0)) throw UsageError(std::string(name) + " must be in (0, 1]");
  };
  unit(theta1, "theta1");
  unit(theta2, "theta2");
  unit(theta_sdk, "theta-sdk");
  if (shingle == 0) throw UsageError("shingle size must be positive");
}

namespace {

bool code_char(char c) { return is_ascii_alnum(c) || c == '_' || c == '$'; }

std::vector<std::string> code_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  for (std::string_view cp : utf8_codepoints(text)) {
    if (cp.size() == 1 && code_char(cp[0])) {
      word += cp;
      continue;
    }
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
    if (cp.size() == 1 && std::isspace(static_cast<unsigned char>(cp[0]))) continue;
    out.emplace_back(cp);
  }
  if (!word.empty()) out.push_back(std::move(word));
  return out;
}

bool fingerprinted(std::string_view path) {
  for (std::string_view ext : {".js", ".ts", ".wxml", ".wxs"})
    if (path.ends_with(ext)) return true;
  return false;
}

std::string basename_of(const std::string& path) {
  auto slash = path.rfind('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string parent_name(const std::string& path) {
  auto slash = path.rfind('/');
  if (slash == std::string::npos) return "";
  std::string dir = path.substr(0, slash);
  auto up = dir.rfind('/');
  return up == std::string::npos ? dir : dir.substr(up + 1);
}

}  // namespace

Shingles shingle(std::string_view text, std::size_t k) {
  Shingles out;
  auto toks = code_tokens(text);
  if (toks.empty()) return out;
  if (k == 0) k = 1;
  auto join = [&](std::size_t from, std::size_t n) {
    std::string s;
    for (std::size_t i = from; i < from + n; ++i) {
      if (i > from) s += '\x1f';
      s += toks[i];
    }
    return s;
  };
  if (toks.size() < k) {
    ++out[join(0, toks.size())];
    return out;
  }
  for (std::size_t i = 0; i + k <= toks.size(); ++i) ++out[join(i, k)];
  return out;
}

std::size_t shingle_count(const Shingles& s) {
  std::size_t n = 0;
  for (const auto& [_, c] : s) n += c;
  return n;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

double jaccard(const Shingles& a, const Shingles& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t lo = 0, hi = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() || j != b.end()) {
    if (j == b.end() || (i != a.end() && i->first < j->first)) {
      hi += i->second;
      ++i;
    } else if (i == a.end() || j->first < i->first) {
      hi += j->second;
      ++j;
    } else {
      lo += std::min(i->second, j->second);
      hi += std::max(i->second, j->second);
      ++i;
      ++j;
    }
  }
  return static_cast<double>(lo) / static_cast<double>(hi);
}

AppFingerprint fingerprint(const SubAppPackage& pkg, std::size_t k) {
  AppFingerprint fp;
  fp.appid = pkg.appid;
  fp.dev = pkg.meta.developer;
  for (const Page* p : pkg.pages()) fp.rt.insert(p->route);
  for (const auto& [path, text] : pkg.files)
    if (fingerprinted(path)) fp.ctn[path] = shingle(text, k);
  return fp;
}

double route_similarity(const AppFingerprint& a, const AppFingerprint& b) { return jaccard(a.rt, b.rt); }

double content_similarity(const AppFingerprint& a, const AppFingerprint& b) {
  double num = 0, den = 0;
  auto visit = [&](const std::string& path) {
    auto ia = a.ctn.find(path);
    auto ib = b.ctn.find(path);
    double wa = ia == a.ctn.end() ? 0 : static_cast<double>(shingle_count(ia->second));
    double wb = ib == b.ctn.end() ? 0 : static_cast<double>(shingle_count(ib->second));
    double w = wa + wb;
    den += w;
    if (ia != a.ctn.end() && ib != b.ctn.end()) num += w * jaccard(ia->second, ib->second);
  };
  for (const auto& [path, _] : a.ctn) visit(path);
  for (const auto& [path, _] : b.ctn)
    if (!a.ctn.count(path)) visit(path);
  return den == 0 ? 1.0 : num / den;
}

std::vector<TemplateCluster> detect_templates(std::vector<AppFingerprint> fps, const ClusterConfig& cfg) {
  std::stable_sort(fps.begin(), fps.end(),
                   [](const AppFingerprint& a, const AppFingerprint& b) { return a.appid < b.appid; });
  struct Open {
    std::size_t founder;
    std::vector<std::size_t> members;
  };
  std::vector<Open> open;
  for (std::size_t s = 0; s < fps.size(); ++s) {
    bool added = false;
    for (auto& t : open) {
      const AppFingerprint& rep = fps[t.founder];
      if (route_similarity(fps[s], rep) >= cfg.theta1 && content_similarity(fps[s], rep) >= cfg.theta2) {
        t.members.push_back(s);
        added = true;
      }
    }
    if (!added) open.push_back({s, {s}});
  }
  std::vector<TemplateCluster> out;
  for (const auto& t : open) {
    TemplateCluster c;
    c.representative = fps[t.founder].appid;
    for (std::size_t m : t.members) {
      c.members.push_back(fps[m].appid);
      if (!fps[m].dev.empty()) c.developers.insert(fps[m].dev);
    }
    if (c.members.size() < 2 || c.developers.size() < 2) continue;
    c.id = static_cast<int>(out.size()) + 1;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<SdkFileCluster> detect_sdk_files(const std::vector<AppFingerprint>& fps, const ClusterConfig& cfg) {
  std::vector<const AppFingerprint*> order;
  for (const auto& f : fps) order.push_back(&f);
  std::stable_sort(order.begin(), order.end(),
                   [](const AppFingerprint* a, const AppFingerprint* b) { return a->appid < b->appid; });

  struct File {
    const AppFingerprint* app;
    const std::string* path;
    const Shingles* content;
  };
  std::map<std::string, std::vector<File>> groups;
  for (const AppFingerprint* app : order)
    for (const auto& [path, sh] : app->ctn)
      if (path.ends_with(".js")) groups[basename_of(path)].push_back({app, &path, &sh});

  std::vector<SdkFileCluster> out;
  for (const auto& [name, files] : groups) {
    std::vector<std::vector<const File*>> clusters;
    for (const File& f : files) {
      auto fits = [&](const std::vector<const File*>& c) {
        return std::all_of(c.begin(), c.end(),
                           [&](const File* m) { return jaccard(*m->content, *f.content) >= cfg.theta_sdk; });
      };
      auto it = std::find_if(clusters.begin(), clusters.end(), fits);
      if (it == clusters.end())
        clusters.push_back({&f});
      else
        it->push_back(&f);
    }
    for (const auto& c : clusters) {
      SdkFileCluster fc;
      fc.file_name = name;
      std::set<std::string> apps;
      for (const File* f : c) {
        fc.member_files.emplace_back(f->app->appid, *f->path);
        apps.insert(f->app->appid);
      }
      fc.usage_count = apps.size();
      if (fc.usage_count > cfg.min_sdk_usage) out.push_back(std::move(fc));
    }
  }
  return out;
}

std::vector<SdkCluster> detect_sdks(const std::vector<AppFingerprint>& fps, const ClusterConfig& cfg) {
  std::map<std::string, SdkCluster> merged;
  for (auto& fc : detect_sdk_files(fps, cfg)) {
    std::map<std::string, std::size_t> dirs;
    for (const auto& [_, path] : fc.member_files) ++dirs[parent_name(path)];
    auto best = std::max_element(dirs.begin(), dirs.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    std::string key = best->first.empty() ? fc.file_name : best->first + "/";
    SdkCluster& sdk = merged[key];
    sdk.name = best->first.empty() ? fc.file_name : best->first;
    sdk.file_names.push_back(fc.file_name);
    sdk.member_files.insert(sdk.member_files.end(), fc.member_files.begin(), fc.member_files.end());
  }
  std::vector<SdkCluster> out;
  for (auto& [_, sdk] : merged) {
    std::sort(sdk.file_names.begin(), sdk.file_names.end());
    std::sort(sdk.member_files.begin(), sdk.member_files.end());
    sdk.member_files.erase(std::unique(sdk.member_files.begin(), sdk.member_files.end()), sdk.member_files.end());
    std::set<std::string> apps;
    for (const auto& [app, _] : sdk.member_files) apps.insert(app);
    sdk.usage_count = apps.size();
    sdk.id = static_cast<int>(out.size()) + 1;
    out.push_back(std::move(sdk));
  }
  return out;
}

Attribution attribute_spo(const std::vector<TemplateCluster>& templates, const std::vector<SdkCluster>& sdks,
                          const std::vector<SpoReport>& reports) {
  Attribution out;
  std::map<std::string, const SpoReport*> by_app;
  for (const auto& r : reports)
    if (!r.error) by_app.emplace(r.appid, &r);

  auto mean = [&](const std::vector<std::string>& apps, int id) {
    TemplateAttribution a;
    a.template_id = id;
    std::size_t collected = 0, spo = 0;
    for (const auto& app : apps) {
      auto it = by_app.find(app);
      if (it == by_app.end()) continue;
      ++a.apps;
      collected += it->second->s_collect.size();
      spo += it->second->s_spo.size();
    }
    if (a.apps) {
      a.mean_collected = static_cast<double>(collected) / static_cast<double>(a.apps);
      a.mean_spo = static_cast<double>(spo) / static_cast<double>(a.apps);
    }
    return a;
  };
  std::set<std::string> in_template;
  for (const auto& t : templates) {
    out.templates.push_back(mean(t.members, t.id));
    in_template.insert(t.members.begin(), t.members.end());
  }
  std::vector<std::string> rest;
  for (const auto& [app, _] : by_app)
    if (!in_template.count(app)) rest.push_back(app);
  out.others = mean(rest, -1);

  for (const auto& sdk : sdks) {
    SdkAttribution a;
    a.sdk_id = sdk.id;
    std::set<std::pair<std::string, std::string>> files(sdk.member_files.begin(), sdk.member_files.end());
    for (const auto& [app, r] : by_app) {
      for (const auto& f : r->flow_evidence) {
        if (f.source_kind == to_string(SourceKind::UipHandlerParam) ||
            f.source_kind == to_string(SourceKind::FormSubmitEvent))
          continue;
        if (!files.count({app, f.source.file})) continue;
        ++a.flows;
        a.items.insert(f.items.begin(), f.items.end());
        if (std::any_of(f.items.begin(), f.items.end(), [&](const std::string& i) { return r->s_spo.count(i) > 0; }))
          ++a.spo_flows;
      }
    }
    out.sdks.push_back(std::move(a));
  }
  return out;
}

MiningResult mine(const std::vector<AppFingerprint>& fps, const std::vector<SpoReport>& reports,
                  const ClusterConfig& cfg) {
  MiningResult m;
  m.templates = detect_templates(fps, cfg);
  m.sdks = detect_sdks(fps, cfg);
  m.attribution = attribute_spo(m.templates, m.sdks, reports);
  std::map<std::string, std::size_t> count;
  for (const auto& t : m.templates)
    for (const auto& app : t.members) ++count[app];
  for (const auto& [app, n] : count)
    if (n > 1) m.memberships[app] = n;
  return m;
}

}  // namespace spo
