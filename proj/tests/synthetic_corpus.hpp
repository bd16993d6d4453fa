#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace spo::test {

namespace synth {

inline std::string ident(std::mt19937& rng, const char* prefix) {
  static const char* parts[] = {"user", "order", "cart", "item", "page", "list", "shop", "total", "price", "count",
                                "load", "show", "view", "tab",  "more", "next", "prev", "index", "coupon", "note"};
  std::uniform_int_distribution<std::size_t> d(0, std::size(parts) - 1);
  return std::string(prefix) + parts[d(rng)] + parts[d(rng)] + std::to_string(rng() % 100);
}

/// One plausible script statement.
inline std::string statement(std::mt19937& rng) {
  switch (rng() % 5) {
    case 0:
      return "function " + ident(rng, "f_") + "(a, b) { return a * " + std::to_string(rng() % 50) + " + b; }\n";
    case 1:
      return "const " + ident(rng, "c_") + " = { key: '" + ident(rng, "") + "', size: " + std::to_string(rng() % 900) +
             " };\n";
    case 2:
      return "if (" + ident(rng, "v_") + " > " + std::to_string(rng() % 10) + ") { " + ident(rng, "g_") + "(" +
             ident(rng, "v_") + "); }\n";
    case 3:
      return "let " + ident(rng, "l_") + " = [" + std::to_string(rng() % 7) + ", " + std::to_string(rng() % 7) +
             "].map((x) => x + " + std::to_string(rng() % 9) + ");\n";
    default:
      return "wx.setStorageSync('" + ident(rng, "k_") + "', " + std::to_string(rng() % 1000) + ");\n";
  }
}

inline std::vector<std::string> body(std::mt19937& rng, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(statement(rng));
  return out;
}

inline std::string join(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l;
  return s;
}

inline void put(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

struct AppSpec {
  std::string appid;
  std::string developer;
  std::vector<std::string> routes;
  std::map<std::string, std::string> extra;  // additional files
  std::map<std::string, std::string> page_js;
};

inline void write_app(const std::filesystem::path& root, const AppSpec& a) {
  auto dir = root / a.appid;
  std::string pages;
  for (const auto& r : a.routes) pages += std::string(pages.empty() ? "" : ", ") + "\"" + r + "\"";
  put(dir / "app.json", "{\"pages\": [" + pages + "]}\n");
  put(dir / "app.js", "App({ globalData: { appid: '" + a.appid + "' } });\n");
  put(dir / "meta.json", "{\"developer\": \"" + a.developer + "\", \"recently_used\": 10}\n");
  for (const auto& r : a.routes) {
    auto it = a.page_js.find(r);
    put(dir / (r + ".js"), it != a.page_js.end() ? it->second : "Page({});\n");
    put(dir / (r + ".wxml"), "<view class=\"" + std::filesystem::path(r).filename().string() + "\">page</view>\n");
  }
  for (const auto& [path, text] : a.extra) put(dir / path, text);
}

}  // namespace synth

/// 30 apps: template A (8 apps, 4 developers), template B (6 apps, 3
/// developers), template C (5 apps, one developer), a template used once,
/// and 10 unrelated apps. Members of a template share routes and code but
/// each carries `drift` changed statements per page.
struct TemplateCorpus {
  std::vector<std::vector<std::string>> expected;  // surviving clusters, members sorted
  std::map<std::string, int> drift;                // appid -> changed statements
};

inline TemplateCorpus write_template_corpus(const std::filesystem::path& root) {
  using namespace synth;
  std::mt19937 rng(2024);
  std::vector<std::string> ids;
  for (int i = 1; i <= 30; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "wxt%04d", i);
    ids.push_back(buf);
  }
  // interleave template members across the id space
  std::vector<std::string> order = ids;
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t next = 0;
  auto take = [&](int n) {
    std::vector<std::string> out(order.begin() + static_cast<long>(next), order.begin() + static_cast<long>(next + n));
    next += static_cast<std::size_t>(n);
    return out;
  };

  TemplateCorpus tc;
  auto make_template = [&](const std::string& tag, const std::vector<std::string>& members,
                           const std::vector<std::string>& devs) {
    std::vector<std::string> routes;
    for (int p = 0; p < 6; ++p) routes.push_back("pages/" + tag + std::to_string(p) + "/index");
    std::map<std::string, std::vector<std::string>> base;
    for (const auto& r : routes) base[r] = body(rng, 120);
    for (std::size_t m = 0; m < members.size(); ++m) {
      AppSpec a{members[m], devs[m % devs.size()], routes, {}, {}};
      int drift = static_cast<int>(m % 3);  // 0, 1 or 2 changed statements per page
      tc.drift[members[m]] = drift;
      for (const auto& r : routes) {
        auto lines = base[r];
        for (int d = 0; d < drift; ++d) lines[static_cast<std::size_t>(5 + 50 * d)] = statement(rng);
        a.page_js[r] = "const TITLE = '" + members[m] + "';\n" + join(lines) + "Page({});\n";
      }
      write_app(root, a);
    }
  };

  auto a = take(8), b = take(6), c = take(5), single = take(1);
  make_template("shop", a, {"Dev Alpha", "Dev Beta", "Dev Gamma", "Dev Delta"});
  make_template("book", b, {"Dev Eta", "Dev Theta", "Dev Iota"});
  make_template("quiz", c, {"Solo Works"});
  make_template("menu", single, {"Dev Kappa"});
  for (const auto& id : take(10)) {
    std::vector<std::string> routes{"pages/index/index"};
    for (int p = 0; p < 3; ++p) routes.push_back("pages/" + ident(rng, "r") + "/index");
    AppSpec u{id, "Indie " + id, routes, {}, {}};
    for (const auto& r : routes) u.page_js[r] = join(body(rng, 30)) + "Page({});\n";
    write_app(root, u);
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  tc.expected = {a, b};
  std::sort(tc.expected.begin(), tc.expected.end());
  return tc;
}

/// 10 apps; wxs0003, wxs0005, wxs0008 and wxs0010 embed the same three-file
/// SDK under libs/stat-sdk/. Other apps carry same-named files with
/// different contents.
inline std::vector<std::string> write_sdk_corpus(const std::filesystem::path& root) {
  using namespace synth;
  std::mt19937 rng(77);
  std::map<std::string, std::string> sdk;
  for (const char* f : {"core.js", "net.js", "store.js"})
    sdk[std::string("libs/stat-sdk/") + f] = join(body(rng, 25)) + "module.exports = {};\n";
  std::vector<std::string> users{"wxs0003", "wxs0005", "wxs0008", "wxs0010"};
  for (int i = 1; i <= 10; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "wxs%04d", i);
    AppSpec a{buf, "Dev " + std::to_string(i), {"pages/index/index"}, {}, {}};
    a.page_js["pages/index/index"] = join(body(rng, 15)) + "Page({});\n";
    if (std::find(users.begin(), users.end(), a.appid) != users.end()) {
      a.extra = sdk;
    } else {
      a.extra["utils/net.js"] = join(body(rng, 12)) + "module.exports = {};\n";
      if (i % 2) a.extra["utils/store.js"] = join(body(rng, 12)) + "module.exports = {};\n";
    }
    write_app(root, a);
  }
  return users;
}

}  // namespace spo::test
