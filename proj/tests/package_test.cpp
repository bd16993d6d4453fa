#include <doctest.h>

#include "spo/package.hpp"
#include "test_support.hpp"

using namespace spo;
using spo::test::TempDir;

namespace {

void write_page(const TempDir& d, const std::string& route, const std::string& markup = "<view/>") {
  d.write(route + ".js", "Page({})\n");
  d.write(route + ".wxml", markup);
}

void write_basic(const TempDir& d) {
  d.write("app.json", R"({
    "pages": ["pages/index/index", "pages/me/me"],
    "subpackages": [{"root": "shop/", "pages": ["pages/a/a", "pages/b/b", "pages/c/c"]}],
    "usingComponents": {"nav": "/components/nav/nav"}
  })");
  d.write("app.js", "App({})\n");
  write_page(d, "pages/index/index");
  write_page(d, "pages/me/me");
  for (const char* p : {"a", "b", "c"}) write_page(d, std::string("shop/pages/") + p + "/" + p);
  d.write("meta.json", R"({"developer": "Acme", "category": "shopping", "recently_used": 1200})");
}

}  // namespace

TEST_CASE("ingest: pages of main and sub-packages") {
  TempDir d("ingest");
  write_basic(d);
  auto pkg = load_package(d.path());
  CHECK(pkg.appid == d.path().filename().string());
  CHECK(pkg.main_pkg.pages.size() == 2);
  REQUIRE(pkg.sub_pkgs.size() == 1);
  CHECK(pkg.sub_pkgs[0].root_path == "shop");
  CHECK(pkg.sub_pkgs[0].pages.size() == 3);
  CHECK(pkg.pages().size() == 5);
  CHECK(pkg.page("shop/pages/b/b") != nullptr);
  REQUIRE(pkg.entry_page());
  CHECK(pkg.entry_page()->route == "pages/index/index");
  CHECK(pkg.app_config.using_components.at("nav") == "/components/nav/nav");
  CHECK(pkg.meta.developer == "Acme");
  CHECK(pkg.meta.recently_used == 1200);
  CHECK(pkg.app_script == "App({})\n");
  CHECK(pkg.warnings.empty());
  CHECK_FALSE(pkg.files.count("meta.json"));
}

TEST_CASE("ingest: byte size per code package") {
  TempDir d("ingest");
  write_basic(d);
  d.write("shop/readme.md", "not counted");
  auto pkg = load_package(d.path());
  std::uint64_t main = 0, sub = 0;
  for (const auto& [path, text] : pkg.files) {
    if (!(path.ends_with(".js") || path.ends_with(".wxml") || path.ends_with(".json"))) continue;
    (path.starts_with("shop/") ? sub : main) += text.size();
  }
  CHECK(pkg.main_pkg.byte_size == main);
  CHECK(pkg.sub_pkgs[0].byte_size == sub);
  CHECK(pkg.byte_size() == main + sub);
}

TEST_CASE("ingest: a page without script is skipped with a warning") {
  TempDir d("ingest");
  write_basic(d);
  std::filesystem::remove(d.path() / "shop/pages/b/b.js");
  auto pkg = load_package(d.path());
  CHECK(pkg.pages().size() == 4);
  CHECK(pkg.page("shop/pages/b/b") == nullptr);
  REQUIRE(pkg.warnings.size() == 1);
  CHECK(pkg.warnings[0].where == "shop/pages/b/b");
}

TEST_CASE("ingest: structural errors") {
  TempDir d("ingest");
  CHECK_THROWS_AS(load_package(d.path()), LoadError);
  d.write("app.json", "{ not json");
  CHECK_THROWS_AS(load_package(d.path()), LoadError);
  d.write("app.json", R"({"pages": ["pages/a/a", "/pages/a/a"]})");
  write_page(d, "pages/a/a");
  CHECK_THROWS_AS(load_package(d.path()), LoadError);
  d.write("app.json", R"({"pages": ["pages/missing/missing"]})");
  CHECK_THROWS_AS(load_package(d.path()), LoadError);
  CHECK_THROWS_AS(load_package(d.path() / "nope"), LoadError);
}

TEST_CASE("ingest: entry page and page configuration") {
  TempDir d("ingest");
  write_basic(d);
  d.write("app.json", R"({"pages": ["pages/index/index", "pages/me/me"], "entryPagePath": "pages/me/me"})");
  d.write("pages/me/me.json", R"({"usingComponents": {"card": "../../components/card/card"}})");
  auto pkg = load_package(d.path());
  CHECK(pkg.entry_page()->route == "pages/me/me");
  CHECK(pkg.page("pages/me/me")->config.using_components.at("card") == "../../components/card/card");
  CHECK(pkg.sub_pkgs.empty());
}

TEST_CASE("ingest: loading is deterministic") {
  TempDir d("ingest");
  write_basic(d);
  CHECK(load_package(d.path()) == load_package(d.path()));
}

TEST_CASE("policy: external file wins") {
  TempDir d("policy");
  write_basic(d);
  d.write("policy.txt", std::string(60, 'x'));
  auto pkg = load_package(d.path());
  auto found = locate_policies(pkg, spo::test::shipped().vocabulary());
  REQUIRE(found.size() == 1);
  CHECK(found[0].source == PolicySource::ExternalFile);
  CHECK(found[0].valid);
  CHECK(policy_status(found) == PolicyStatus::Valid);
}

TEST_CASE("policy: indicator links to a page, an asset and the web") {
  TempDir d("policy");
  write_basic(d);
  const std::string body(80, 'p');
  write_page(d, "pages/me/me",
             "<view><navigator url=\"/shop/pages/a/a\"><text>Privacy Policy</text></navigator>"
             "<view data-src=\"../../docs/policy.html\">privacy notice</view>"
             "<text href=\"https://example.com/p\">Privacy statement</text></view>");
  write_page(d, "shop/pages/a/a", "<view><text>" + body + "</text></view>");
  d.write("docs/policy.html", "<html><body><p>short</p></body></html>");
  auto pkg = load_package(d.path());
  auto found = locate_policies(pkg, spo::test::shipped().vocabulary());
  REQUIRE(found.size() == 3);
  CHECK(found[0].source == PolicySource::PageText);
  CHECK(found[0].origin == "shop/pages/a/a");
  CHECK(found[0].text == body);
  CHECK(found[0].valid);
  CHECK(found[1].source == PolicySource::InPackageAsset);
  CHECK(found[1].origin == "docs/policy.html");
  CHECK(found[1].text == "short");
  CHECK_FALSE(found[1].valid);
  CHECK(found[2].source == PolicySource::RemoteUrl);
  CHECK(found[2].text.empty());

  PolicyLocateOptions opts;
  opts.fetch_remote = true;
  opts.retriever = [&](const std::string& url) -> std::optional<std::string> {
    CHECK(url == "https://example.com/p");
    return body;
  };
  auto fetched = locate_policies(pkg, spo::test::shipped().vocabulary(), std::nullopt, opts);
  CHECK(fetched[2].valid);
}

TEST_CASE("policy: indicator without link uses the page text") {
  TempDir d("policy");
  write_basic(d);
  write_page(d, "pages/me/me", "<view><text>隐私政策</text><text>短</text></view>");
  auto pkg = load_package(d.path());
  auto found = locate_policies(pkg, spo::test::shipped().vocabulary("zh"));
  REQUIRE(found.size() == 1);
  CHECK(found[0].source == PolicySource::PageText);
  CHECK(found[0].origin == "pages/me/me");
  CHECK(policy_status(found) == PolicyStatus::Invalid);
  CHECK(policy_status({}) == PolicyStatus::Missing);
}

TEST_CASE("policy: length counts characters after trimming") {
  CHECK(policy_length("  abc \n") == 3);
  CHECK(policy_length("隐私") == 2);
  CHECK(policy_valid(std::string(50, 'a'), 50));
  CHECK_FALSE(policy_valid(std::string(49, 'a') + "   ", 50));
  CHECK_FALSE(policy_valid("", 0));
}
