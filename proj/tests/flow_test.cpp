#include <doctest.h>

#include <random>

#include "spo/flow.hpp"
#include "test_support.hpp"

using namespace spo;
using spo::test::TempDir;

namespace {

struct Run {
  SubAppPackage pkg;
  ParsedScripts scripts;
  std::unique_ptr<ScriptIndex> index;
  ScriptModels models;
  RenderAnalysis render;
  CallGraph graph;
  std::vector<SourcePoint> sources;
  TaintState state;
  std::vector<TaintFlow> flows;

  explicit Run(const TempDir& d) {
    const Taxonomy& tax = spo::test::shipped();
    pkg = load_package(d.path());
    scripts = parse_package_scripts(pkg);
    index = std::make_unique<ScriptIndex>(scripts, pkg, &tax);
    models = extract_models(*index, pkg);
    render = analyze_render(pkg, &models, tax.lexicon("en"));
    graph = build_call_graph(*index, models, render.bindings, tax);
    sources = mark_sources(graph, *index, models, render.uips, tax);
    state = propagate(graph, *index, sources, tax);
    flows = find_flows(state, graph, *index, tax);
  }

  // "sink<-item" per flow, sorted
  std::vector<std::string> summary() const {
    std::vector<std::string> out;
    for (const auto& f : flows)
      for (const auto& i : f.items) out.push_back(f.sink + "<-" + i);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

void app(const TempDir& d, const std::string& page_js, const std::string& wxml = "<view/>") {
  d.write("app.json", R"({"pages": ["pages/index/index"]})");
  d.write("app.js", "App({})");
  d.write("pages/index/index.js", page_js);
  d.write("pages/index/index.wxml", wxml);
}

using Lines = std::vector<std::string>;

}  // namespace

TEST_CASE("flow: callback parameter through a local into a request") {
  TempDir d("flow");
  app(d, R"(
    Page({ onLoad() {
      wx.getLocation({ type: 'wgs84', success(res) {
        var lat = res.latitude;
        wx.request({ url: 'https://api.example.com/loc', data: { lat } });
      } });
    } });
  )");
  Run r(d);
  REQUIRE(r.sources.size() == 1);
  CHECK(r.sources[0].kind == SourceKind::SubApiCallback);
  CHECK(r.sources[0].bindings == std::vector<std::string>{"res"});
  int cb = r.sources[0].fn;
  CHECK(r.state.binding_items(cb, "lat") == ItemSet{"location_d"});
  REQUIRE(r.flows.size() == 1);
  CHECK(r.flows[0].sink == "request");
  CHECK(r.flows[0].items == ItemSet{"location_d"});
  CHECK(r.flows[0].url == "https://api.example.com/loc");
  CHECK(r.flows[0].path.front().first == cb);
  CHECK(r.flows[0].path.back().first == cb);
  CHECK(collect_set(r.flows) == ItemSet{"location_d"});
}

TEST_CASE("flow: returns are matched to their call site") {
  TempDir d("flow");
  app(d, R"(
    function id(a) { return a; }
    function send(v) { wx.request({ url: 'u', data: v }); }
    Page({ onLoad() {
      const clean = id('constant');
      wx.request({ url: 'u', data: clean });
      wx.getLocation({ success: (res) => {
        const t = id(res);
        send(t);
      } });
    } });
  )");
  Run r(d);
  REQUIRE(r.flows.size() == 1);
  const auto& f = r.flows[0];
  CHECK(r.index->function(f.sink_fn).name == "send");
  REQUIRE(f.path.size() == 3);
  CHECK(f.path[1].first == f.source.fn);  // hop: call of send inside the callback
}

TEST_CASE("flow: page data written by setData and read elsewhere") {
  TempDir d("flow");
  app(d, R"(
    Page({
      data: { addr: '', other: '' },
      onLoad() {
        wx.chooseAddress({ success: (res) => { this.setData({ addr: res.detailInfo, other: 'x' }); } });
      },
      onSubmit() {
        wx.request({ url: 'u', data: { a: this.data.addr } });
        wx.request({ url: 'u', data: { o: this.data.other } });
      },
    });
  )", R"(<button bindtap="onSubmit">go</button>)");
  Run r(d);
  CHECK(r.state.page_data_items("pages/index/index", "addr") == ItemSet{"location_p"});
  CHECK(r.state.page_data_items("pages/index/index", "other").empty());
  REQUIRE(r.flows.size() == 1);
  CHECK(r.flows[0].items == ItemSet{"location_p"});
}

TEST_CASE("flow: taint that never reaches a sink is not collected") {
  TempDir d("flow");
  app(d, R"(
    Page({ onLoad() {
      wx.getLocation({ success(res) { console.log(res.latitude); this.setData({ lat: res.latitude }); } });
    } });
  )");
  Run r(d);
  CHECK(r.sources.size() == 1);
  CHECK(r.flows.empty());
  CHECK(collect_set(r.flows).empty());
}

TEST_CASE("flow: chosen image uploaded by path") {
  TempDir d("flow");
  app(d, R"(
    Page({ onLoad() {
      wx.chooseImage({ count: 1, success(res) {
        const path = res.tempFilePaths[0];
        wx.uploadFile({ url: 'https://x/upload', filePath: path, name: 'file' });
      } });
    } });
  )");
  Run r(d);
  CHECK(r.summary() == Lines{"uploadFile<-photo_d"});
}

TEST_CASE("flow: synchronous return and promise results") {
  TempDir d("flow");
  app(d, R"(
    Page({
      async onLoad() {
        const info = wx.getSystemInfoSync();
        wx.request({ url: 'u', data: { model: info.model } });
        const net = await wx.getNetworkType();
        wx.request({ url: 'u', data: net });
        wx.getClipboardData().then((c) => wx.request({ url: 'u', data: c.data }));
        const wifi = await new Promise((resolve) => wx.getWifiList({ success: resolve }));
        wx.request({ url: 'u', header: { w: wifi } });
      },
    });
  )");
  Run r(d);
  CHECK(r.summary() == Lines{"request<-clipboard_d", "request<-device_info_d", "request<-network_d"});
  int returns = 0;
  for (const auto& s : r.sources) returns += s.kind == SourceKind::SubApiReturn;
  CHECK(returns == 1);
  // getWifiList also maps to network_d: its flow is the promise-resolved one
  int network = 0;
  for (const auto& f : r.flows) network += f.items.count("network_d") ? 1 : 0;
  CHECK(network == 2);
}

TEST_CASE("flow: user-input handler parameter and form submission") {
  TempDir d("flow");
  app(d, R"(
    Page({
      onPhone(e) { this.phone = e.detail.value; },
      save() { wx.request({ url: 'u', data: { p: this.phone } }); },
      onSubmit(e) { wx.request({ url: 'u', method: 'POST', data: e.detail.value }); },
      onSearch(e) { wx.request({ url: 'u', data: e.detail.value }); },
    });
  )", R"(
    <input placeholder="phone number" bindinput="onPhone"/>
    <input placeholder="search products" bindinput="onSearch"/>
    <button bindtap="save">save</button>
    <form bindsubmit="onSubmit">
      <view><text>ID number</text><input name="id"/></view>
      <picker mode="region" name="r"/>
    </form>
  )");
  Run r(d);
  std::map<SourceKind, int> kinds;
  for (const auto& s : r.sources) kinds[s.kind]++;
  CHECK(kinds[SourceKind::UipHandlerParam] == 1);
  CHECK(kinds[SourceKind::FormSubmitEvent] == 1);
  CHECK(r.summary() == Lines{"request<-contact_u", "request<-identity_u", "request<-location_u"});
}

TEST_CASE("flow: wrapper libraries and callbacks handed to helpers") {
  TempDir d("flow");
  d.write("utils/net.js", R"(
    const BASE = 'https://api.example.com';
    function post(path, body) {
      return new Promise((resolve, reject) => {
        wx.request({ url: BASE + path, method: 'POST', data: body, success: resolve, fail: reject });
      });
    }
    function locate(cb) { wx.getLocation({ success: (res) => cb(res) }); }
    module.exports = { post, locate };
  )");
  app(d, R"(
    const net = require('../../utils/net.js');
    Page({
      onLoad() { net.locate((loc) => { net.post('/where', { lat: loc.latitude }); }); },
    });
  )");
  Run r(d);
  REQUIRE(r.flows.size() == 1);
  CHECK(r.flows[0].items == ItemSet{"location_d"});
  CHECK(r.flows[0].sink_file == "utils/net.js");
  CHECK(r.flows[0].path.size() >= 3);
}

TEST_CASE("flow: sink payload scope") {
  TempDir d("flow");
  app(d, R"(
    Page({ onLoad() {
      wx.getLocation({ success(res) {
        wx.request({ url: 'u', method: res.latitude, data: {} });
        wx.uploadFile({ url: res.latitude, filePath: 'a.png', name: 'f' });
        wx.uploadFile({ url: 'u', filePath: 'a.png', name: 'f', formData: { where: res } });
        const task = wx.connectSocket({ url: 'wss://x' });
        task.send({ data: JSON.stringify(res) });
      } });
    } });
  )");
  Run r(d);
  CHECK(r.summary() == Lines{"SocketTask.send<-location_d", "uploadFile<-location_d"});
  CHECK(r.flows.size() == 2);
}

TEST_CASE("flow: owner properties, app globals and listeners") {
  TempDir d("flow");
  d.write("app.json", R"({"pages": ["pages/a/a", "pages/b/b"]})");
  d.write("app.js", "App({ globalData: {}, onLaunch() { wx.onAccelerometerChange((m) => { this.globalData.motion = m; }); } })");
  d.write("pages/a/a.js", R"(
    const app = getApp();
    Page({ onShow() { wx.request({ url: 'u', data: app.globalData.motion }); } });
  )");
  d.write("pages/a/a.wxml", "<view/>");
  d.write("pages/b/b.js", R"(
    Page({
      onLoad() { const that = this; wx.getBluetoothDevices({ success(res) { that.devices = res.devices; } }); },
      onReady() { wx.request({ url: 'u', data: { d: this.devices } }); },
    });
  )");
  d.write("pages/b/b.wxml", "<view/>");
  Run r(d);
  CHECK(r.summary() == Lines{"request<-bluetooth_d", "request<-sensor_d"});
}

TEST_CASE("flow: opaque regions taint what they write") {
  TempDir d("flow");
  app(d, R"(
    Page({ onLoad() {
      wx.getClipboardData({ success(res) {
        var copy;
        eval('copy = res');
        wx.request({ url: 'u', data: copy });
      } });
    } });
  )");
  Run r(d);
  CHECK(r.summary() == Lines{"request<-clipboard_d"});
}

TEST_CASE("flow: relays through storage or files are not tracked") {
  TempDir d("flow");
  app(d, R"(
    Page({
      onLoad() {
        wx.getLocation({ success(res) { wx.setStorageSync('loc', res); } });
        wx.chooseImage({ success(res) {
          const fs = wx.getFileSystemManager();
          fs.saveFile({ tempFilePath: res.tempFilePaths[0], filePath: `${wx.env.USER_DATA_PATH}/avatar.png` });
        } });
      },
      onShow() {
        wx.request({ url: 'u', data: wx.getStorageSync('loc') });
        wx.uploadFile({ url: 'u', filePath: wx.env.USER_DATA_PATH + '/avatar.png', name: 'f' });
      },
    });
  )");
  Run r(d);
  CHECK(r.flows.empty());
}

TEST_CASE("flow: unreachable code contributes nothing") {
  TempDir d("flow");
  app(d, R"(
    function neverCalled() {
      wx.getLocation({ success(res) { wx.request({ url: 'u', data: res }); } });
    }
    Page({ onLoad() {} });
  )");
  Run r(d);
  CHECK(r.sources.empty());
  CHECK(r.flows.empty());
}

TEST_CASE("flow: collect_set is a set union") {
  TaintFlow a, b, c;
  a.items = {"location_d"};
  b.items = {"location_d"};
  c.items = {"contact_u"};
  CHECK(collect_set({a, b, c}) == ItemSet{"location_d", "contact_u"});
  CHECK(collect_set({}).empty());
}

// Random straight-line programs over a handful of variables. Adding a source
// must never remove taint anywhere, and the fixpoint must settle within the
// bound given by bindings x labels.
TEST_CASE("flow: propagation is monotone and terminates") {
  std::mt19937 rng(11);
  const Taxonomy& tax = spo::test::shipped();
  for (int round = 0; round < 20; ++round) {
    const int vars = 6;
    std::string body;
    auto v = [&](unsigned k) { return "v" + std::to_string(k % vars); };
    for (int s = 0; s < 25; ++s) {
      switch (rng() % 5) {
        case 0: body += v(rng()) + " = " + v(rng()) + ";\n"; break;
        case 1: body += v(rng()) + " = " + v(rng()) + " + '-' + " + v(rng()) + ";\n"; break;
        case 2: body += v(rng()) + " = { k: " + v(rng()) + " };\n"; break;
        case 3: body += v(rng()) + " = helper(" + v(rng()) + ");\n"; break;
        default: body += "wx.request({ url: 'u', data: " + v(rng()) + " });\n"; break;
      }
    }
    std::string decl;
    for (int k = 0; k < vars; ++k) decl += "var v" + std::to_string(k) + " = 0;\n";
    std::string js = "function helper(x) { return [x]; }\n" + decl +
                     "Page({ onLoad() {\n"
                     "  wx.getLocation({ success(a) { v0 = a; } });\n"
                     "  wx.getClipboardData({ success(b) { v3 = b; } });\n" +
                     body + "} });\n";
    TempDir d("mono");
    app(d, js);
    auto pkg = load_package(d.path());
    auto scripts = parse_package_scripts(pkg);
    ScriptIndex index(scripts, pkg, &tax);
    auto models = extract_models(index, pkg);
    auto graph = build_call_graph(index, models, {}, tax);
    auto sources = mark_sources(graph, index, models, {}, tax);
    REQUIRE(sources.size() == 2);
    auto one = propagate(graph, index, {sources[0]}, tax);
    auto both = propagate(graph, index, sources, tax);
    std::size_t bindings = 0;
    for (const auto& [loc, labels] : one.locs) {
      auto it = both.locs.find(loc);
      REQUIRE(it != both.locs.end());
      auto big = both.items(it->second), small = one.items(labels);
      CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    }
    bindings = both.locs.size();
    CHECK(both.iterations >= 1);
    CHECK(static_cast<std::size_t>(both.iterations) <= bindings * (sources.size() + 8) + 1);
    auto f1 = collect_set(find_flows(one, graph, index, tax));
    auto f2 = collect_set(find_flows(both, graph, index, tax));
    CHECK(std::includes(f2.begin(), f2.end(), f1.begin(), f1.end()));
  }
}

TEST_CASE("flow: listeners on a manager object returned by a source receive its data") {
  TempDir d("flow");
  app(d, R"(
    const rec = wx.getRecorderManager();
    const plain = wx.connectSocket({ url: 'wss://x' });
    Page({
      onLoad() {
        rec.onStop((res) => wx.uploadFile({ url: 'u', filePath: res.tempFilePath, name: 'a' }));
        plain.onMessage((m) => wx.request({ url: 'u', data: m.data }));
      },
    });
  )");
  Run r(d);
  CHECK(r.summary() == Lines{"uploadFile<-recording_d"});
  REQUIRE(r.flows.size() == 1);
  CHECK(r.flows[0].source.kind == SourceKind::SubApiReturn);
}
