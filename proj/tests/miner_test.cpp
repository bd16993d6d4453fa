#include <doctest.h>

#include <functional>
#include <random>

#include "spo/miner.hpp"
#include "spo/pipeline.hpp"
#include "synthetic_corpus.hpp"
#include "test_support.hpp"

using namespace spo;
using namespace spo::test;

namespace {

std::vector<AppFingerprint> fingerprints_of(const std::filesystem::path& root) {
  std::vector<AppFingerprint> out;
  for (const auto& dir : list_apps(root)) out.push_back(fingerprint(load_package(dir)));
  return out;
}

std::vector<std::vector<std::string>> memberships(const std::vector<TemplateCluster>& cs) {
  std::vector<std::vector<std::string>> out;
  for (const auto& c : cs) {
    auto m = c.members;
    std::sort(m.begin(), m.end());
    out.push_back(m);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t clustered_apps(const std::vector<TemplateCluster>& cs) {
  std::set<std::string> apps;
  for (const auto& c : cs) apps.insert(c.members.begin(), c.members.end());
  return apps.size();
}

Shingles random_shingles(std::mt19937& rng, int max_kinds) {
  Shingles s;
  int n = static_cast<int>(rng() % static_cast<unsigned>(max_kinds + 1));
  for (int i = 0; i < n; ++i) s["t" + std::to_string(rng() % 12)] += 1 + rng() % 3;
  return s;
}

AppFingerprint routes_fp(const std::string& id, const std::string& dev, int first, int count) {
  AppFingerprint fp;
  fp.appid = id;
  fp.dev = dev;
  for (int i = first; i < first + count; ++i) fp.rt.insert("pages/p" + std::to_string(i) + "/index");
  fp.ctn["pages/p0/index.js"] = shingle("Page({ data: { a: 1 }, onLoad() { this.setData({ a: 2 }); } });");
  return fp;
}

}  // namespace

TEST_CASE("miner: code is split into identifier runs and single symbols") {
  auto s = shingle("foo.bar(1)", 5);
  // foo . bar ( 1 ) -> two 5-token windows
  CHECK(shingle_count(s) == 2);
  CHECK(s.size() == 2);
  auto tiny = shingle("a + b", 5);
  CHECK(shingle_count(tiny) == 1);
  CHECK(shingle("", 5).empty());
  // whitespace does not matter
  CHECK(shingle("x=a+b;", 3) == shingle("x = a +\n  b ;", 3));
}

TEST_CASE("miner: jaccard basics") {
  CHECK(jaccard(std::set<std::string>{}, std::set<std::string>{}) == 1.0);
  CHECK(jaccard(std::set<std::string>{"a", "b"}, std::set<std::string>{"b", "c"}) == doctest::Approx(1.0 / 3));
  CHECK(jaccard(std::set<std::string>{"a"}, std::set<std::string>{"b"}) == 0.0);
  CHECK(jaccard(Shingles{{"a", 2}}, Shingles{{"a", 1}}) == doctest::Approx(0.5));
  CHECK(jaccard(Shingles{{"a", 2}, {"b", 1}}, Shingles{{"a", 1}, {"c", 1}}) == doctest::Approx(1.0 / 4));
  CHECK(jaccard(Shingles{}, Shingles{}) == 1.0);
}

TEST_CASE("miner: jaccard properties on random multisets") {
  std::mt19937 rng(41);
  for (int round = 0; round < 500; ++round) {
    Shingles a = random_shingles(rng, 8), b = random_shingles(rng, 8);
    double ab = jaccard(a, b);
    CHECK(jaccard(a, a) == 1.0);
    CHECK(ab == jaccard(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    if (ab == 1.0) CHECK(a == b);
    std::set<std::string> sa, sb;
    for (const auto& [k, _] : a) sa.insert(k);
    for (const auto& [k, _] : b) sb.insert(k);
    CHECK(jaccard(sa, sa) == 1.0);
    CHECK(jaccard(sa, sb) == jaccard(sb, sa));
  }
}

TEST_CASE("miner: content similarity weighs files by size") {
  AppFingerprint a, b;
  Shingles ten;
  for (int i = 0; i < 10; ++i) ten["s" + std::to_string(i)] = 1;
  a.ctn["x.js"] = ten;
  a.ctn["y.js"] = ten;
  b.ctn["x.js"] = ten;
  CHECK(content_similarity(a, a) == 1.0);
  // x.js weighs 10 + 10 and matches, y.js weighs 10 and is one-sided
  CHECK(content_similarity(a, b) == doctest::Approx(20.0 / 30));
  CHECK(content_similarity(a, b) == content_similarity(b, a));
}

TEST_CASE("miner: fingerprint reads routes, code files and developer") {
  auto fp = fingerprint(load_package(fixture_dir() / "corpus" / "wxa100000000000005"));
  CHECK(fp.appid == "wxa100000000000005");
  CHECK(fp.dev == "Fapiao Helper Ltd");
  CHECK(fp.rt == std::set<std::string>{"pages/index/index"});
  CHECK(fp.ctn.count("utils/http.js"));
  CHECK(fp.ctn.count("pages/index/index.wxml"));
  CHECK_FALSE(fp.ctn.count("app.json"));
}

TEST_CASE("miner: planted templates are recovered") {
  TempDir d("tmpl");
  auto tc = write_template_corpus(d.path());
  auto fps = fingerprints_of(d.path());
  REQUIRE(fps.size() == 30);
  auto clusters = detect_templates(fps, ClusterConfig{});
  CHECK(memberships(clusters) == tc.expected);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].id == 1);
  CHECK(clusters[1].id == 2);
  for (const auto& c : clusters) {
    CHECK(c.developers.size() >= 2);
    CHECK(c.representative == *std::min_element(c.members.begin(), c.members.end()));
  }
  // input order does not change the result
  std::mt19937 rng(3);
  std::shuffle(fps.begin(), fps.end(), rng);
  CHECK(detect_templates(fps, ClusterConfig{}) == clusters);
}

TEST_CASE("miner: raising thresholds never grows template membership") {
  TempDir d("tmpl");
  write_template_corpus(d.path());
  auto fps = fingerprints_of(d.path());
  std::size_t prev = fps.size();
  for (double th = 0.5; th <= 1.0001; th += 0.025) {
    ClusterConfig cfg;
    cfg.theta1 = cfg.theta2 = std::min(th, 1.0);
    std::size_t now = clustered_apps(detect_templates(fps, cfg));
    CHECK(now <= prev);
    prev = now;
  }
  for (double th2 = 0.5; th2 <= 1.0001; th2 += 0.05) {
    ClusterConfig lo, hi;
    lo.theta1 = hi.theta1 = 0.9;
    lo.theta2 = std::min(th2, 1.0);
    hi.theta2 = std::min(th2 + 0.05, 1.0);
    CHECK(clustered_apps(detect_templates(fps, hi)) <= clustered_apps(detect_templates(fps, lo)));
  }
  ClusterConfig exact;
  exact.theta1 = exact.theta2 = 1.0;
  // only members without drift remain identical to their founder
  for (const auto& c : detect_templates(fps, exact)) CHECK(c.members.size() >= 2);
}

TEST_CASE("miner: twin apps from two developers form one template") {
  auto a = routes_fp("wx1", "Dev A", 0, 12);
  auto b = routes_fp("wx2", "Dev B", 0, 12);
  auto clusters = detect_templates({a, b}, ClusterConfig{});
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].members == std::vector<std::string>{"wx1", "wx2"});
  // same developer twice is not a template
  b.dev = "Dev A";
  CHECK(detect_templates({a, b}, ClusterConfig{}).empty());
  // an empty developer does not count towards diversity
  b.dev = "";
  CHECK(detect_templates({a, b}, ClusterConfig{}).empty());
}

TEST_CASE("miner: route threshold of one rejects near-identical routes") {
  auto a = routes_fp("wx1", "Dev A", 0, 20);
  auto b = routes_fp("wx2", "Dev B", 0, 19);  // 19 of 20 routes shared
  CHECK(route_similarity(a, b) == doctest::Approx(0.95));
  CHECK(detect_templates({a, b}, ClusterConfig{}).size() == 1);
  ClusterConfig strict;
  strict.theta1 = 1.0;
  CHECK(detect_templates({a, b}, strict).empty());
}

TEST_CASE("miner: an app may join several templates") {
  auto a = routes_fp("wx1", "Dev A", 0, 20);
  auto b = routes_fp("wx2", "Dev B", 1, 20);
  auto c = routes_fp("wx3", "Dev C", 2, 20);
  ClusterConfig cfg;
  cfg.theta1 = 0.85;
  auto clusters = detect_templates({a, b, c}, cfg);
  // wx1 founds, wx2 joins (19/21), wx3 does not match wx1 (18/22) and founds
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].members == std::vector<std::string>{"wx1", "wx2"});
  auto d = routes_fp("wx4", "Dev D", 1, 20);
  auto e = routes_fp("wx5", "Dev E", 2, 20);
  auto more = detect_templates({a, b, c, d, e}, cfg);
  REQUIRE(more.size() == 2);
  CHECK(more[0].members == std::vector<std::string>{"wx1", "wx2", "wx4"});
  // wx2 was placed before wx3 founded its cluster
  CHECK(more[1].members == std::vector<std::string>{"wx3", "wx4", "wx5"});
  auto result = mine({a, b, c, d, e}, {}, cfg);
  CHECK(result.memberships == std::map<std::string, std::size_t>{{"wx4", 2}});
}

TEST_CASE("miner: a shared SDK directory is found") {
  TempDir d("sdk");
  auto users = write_sdk_corpus(d.path());
  auto fps = fingerprints_of(d.path());
  REQUIRE(fps.size() == 10);
  ClusterConfig cfg;
  cfg.min_sdk_usage = 3;
  auto sdks = detect_sdks(fps, cfg);
  REQUIRE(sdks.size() == 1);
  CHECK(sdks[0].usage_count == 4);
  CHECK(sdks[0].name == "stat-sdk");
  CHECK(sdks[0].file_names == std::vector<std::string>{"core.js", "net.js", "store.js"});
  CHECK(sdks[0].member_files.size() == 12);
  for (const auto& [app, path] : sdks[0].member_files) {
    CHECK(std::find(users.begin(), users.end(), app) != users.end());
    CHECK(path.starts_with("libs/stat-sdk/"));
  }
  cfg.min_sdk_usage = 4;
  CHECK(detect_sdks(fps, cfg).empty());
}

TEST_CASE("miner: sdk file clusters agree with exhaustive pairwise comparison") {
  std::mt19937 rng(99);
  for (int round = 0; round < 30; ++round) {
    // families of near-identical files under a few shared names
    std::vector<std::vector<std::string>> family(4);
    for (auto& f : family) {
      auto base = synth::body(rng, 30);
      for (int v = 0; v < 3; ++v) {
        auto lines = base;
        if (v) lines[static_cast<std::size_t>(rng() % lines.size())] = "var tweak" + std::to_string(v) + " = 1;\n";
        f.push_back(synth::join(lines));
      }
    }
    const char* names[] = {"a.js", "b.js", "util.js"};
    std::vector<AppFingerprint> fps;
    std::vector<std::tuple<std::string, std::string, int>> files;  // app, path, family
    int nfiles = 0;
    for (int app = 0; app < 8 && nfiles < 50; ++app) {
      AppFingerprint fp;
      fp.appid = "wx" + std::to_string(app);
      int count = 1 + static_cast<int>(rng() % 4);
      for (int k = 0; k < count && nfiles < 50; ++k, ++nfiles) {
        std::string path = "d" + std::to_string(k) + "/" + names[rng() % 3];
        int fam = static_cast<int>(rng() % 4);
        fp.ctn[path] = shingle(family[static_cast<std::size_t>(fam)][rng() % 3]);
        files.emplace_back(fp.appid, path, fam);
      }
      fps.push_back(fp);
    }
    ClusterConfig cfg;
    cfg.min_sdk_usage = 0;
    cfg.theta_sdk = 0.8;
    auto got = detect_sdk_files(fps, cfg);

    // oracle: compare every pair; groups are connected components
    std::map<std::pair<std::string, std::string>, const Shingles*> by_file;
    for (const auto& fp : fps)
      for (const auto& [p, s] : fp.ctn) by_file[{fp.appid, p}] = &s;
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& [k, _] : by_file) keys.push_back(k);
    auto base_name = [](const std::string& p) { return std::filesystem::path(p).filename().string(); };
    std::vector<int> comp(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) comp[i] = static_cast<int>(i);
    std::function<int(int)> root = [&](int x) { return comp[x] == x ? x : comp[x] = root(comp[x]); };
    for (std::size_t i = 0; i < keys.size(); ++i)
      for (std::size_t j = i + 1; j < keys.size(); ++j)
        if (base_name(keys[i].second) == base_name(keys[j].second) &&
            jaccard(*by_file[keys[i]], *by_file[keys[j]]) >= cfg.theta_sdk)
          comp[root(static_cast<int>(i))] = root(static_cast<int>(j));
    std::map<int, std::vector<std::pair<std::string, std::string>>> groups;
    for (std::size_t i = 0; i < keys.size(); ++i) groups[root(static_cast<int>(i))].push_back(keys[i]);
    // every component is a clique here, so first-fit must find exactly these
    std::set<std::vector<std::pair<std::string, std::string>>> want, have;
    for (auto& [_, g] : groups) {
      for (const auto& x : g)
        for (const auto& y : g) CHECK(jaccard(*by_file[x], *by_file[y]) >= cfg.theta_sdk);
      std::sort(g.begin(), g.end());
      want.insert(g);
    }
    for (auto fc : got) {
      std::sort(fc.member_files.begin(), fc.member_files.end());
      have.insert(fc.member_files);
      std::set<std::string> apps;
      for (const auto& [a, _] : fc.member_files) apps.insert(a);
      CHECK(fc.usage_count == apps.size());
    }
    CHECK(have == want);
  }
}

TEST_CASE("miner: attribution of template means and sdk flows") {
  auto run = analyze_corpus(fixture_dir() / "corpus", shipped(), AnalyzeOptions{}, 2, true);
  REQUIRE(run.fingerprints.size() == 12);
  ClusterConfig cfg;
  cfg.min_sdk_usage = 0;
  auto m = mine(run.fingerprints, run.reports, cfg);
  CHECK(m.templates.empty());
  CHECK(m.attribution.others.apps == 12);
  CHECK(m.attribution.others.mean_collected == doctest::Approx(25.0 / 12));
  CHECK(m.attribution.others.mean_spo == doctest::Approx(10.0 / 12));
  // the tracker library of the feedback app: its own flow counts, the
  // flow of the e-mail typed by the user does not
  auto it = std::find_if(m.sdks.begin(), m.sdks.end(), [](const SdkCluster& s) { return s.name == "tracker"; });
  REQUIRE(it != m.sdks.end());
  const auto& att = m.attribution.sdks[static_cast<std::size_t>(it - m.sdks.begin())];
  CHECK(att.sdk_id == it->id);
  CHECK(att.flows == 1);
  CHECK(att.spo_flows == 1);
  CHECK(att.items == ItemSet{"device_info_d"});
}

TEST_CASE("miner: configuration is validated") {
  ClusterConfig c;
  CHECK_NOTHROW(c.validate());
  c.theta1 = 1.5;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = {};
  c.theta_sdk = -0.1;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = {};
  c.shingle = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
}
