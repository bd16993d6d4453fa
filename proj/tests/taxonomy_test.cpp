#include "doctest.h"

#include <json.hpp>
#include <set>

#include "spo/taxonomy.hpp"
#include "spo/text.hpp"
#include "test_support.hpp"

using spo::test::shipped;
using json = nlohmann::json;

namespace {

json shipped_json() { return json::parse(spo::test::slurp(spo::default_taxonomy_path())); }

std::string load_error(const json& doc) {
  try {
    spo::parse_taxonomy(doc.dump());
  } catch (const spo::LoadError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("shipped taxonomy has the expected shape") {
  const auto& tax = shipped();
  CHECK(tax.items().size() == 37);
  std::set<std::string> names;
  int device = 0, platform = 0, user = 0;
  for (const auto& it : tax.items()) {
    names.insert(it.name);
    device += it.category == spo::PrivacyCategory::Device;
    platform += it.category == spo::PrivacyCategory::Platform;
    user += it.category == spo::PrivacyCategory::UserInput;
    CHECK(it.id.back() == spo::category_suffix(it.category));
  }
  CHECK(names.size() == 29);
  CHECK(device == 15);
  CHECK(platform == 5);
  CHECK(user == 17);
  // 112 device subAPIs listed per item, one more from the newly found list,
  // and six platform subAPIs.
  CHECK(tax.subapis().size() == 119);
  CHECK(tax.sinks().size() == 10);
  for (const auto& [name, m] : tax.subapis())
    for (const auto& id : m.items) CHECK(tax.item(id)->category != spo::PrivacyCategory::UserInput);
}

TEST_CASE("subAPI lookup") {
  const auto& tax = shipped();
  CHECK(tax.lookup_subapi("getLocation") == spo::ItemSet{"location_d"});
  CHECK(tax.lookup_subapi("wx.getLocation") == spo::ItemSet{"location_d"});
  CHECK(tax.lookup_subapi("wx.getClipboardData") == spo::ItemSet{"clipboard_d"});
  CHECK(tax.lookup_subapi("closeSocket").empty());
  CHECK(tax.lookup_subapi("wx.getSystemInfoSync") == spo::ItemSet{"device_info_d"});
  CHECK(tax.lookup_subapi("createMapContext.getCenterLocation") == spo::ItemSet{"location_d"});
  CHECK(tax.lookup_subapi("nope").empty());
  CHECK(tax.factory_type("connectSocket") == std::optional<std::string>("SocketTask"));
  CHECK(tax.sink("request")->kind == spo::SinkKind::Request);
  CHECK(tax.sink("uploadFile")->kind == spo::SinkKind::Upload);
  CHECK(tax.protection("location_d") == spo::ProtectionLevel::PartiallyProtected);
  CHECK_FALSE(tax.protection("bluetooth_d").has_value());
}

TEST_CASE("name cover spans categories") {
  const auto& tax = shipped();
  CHECK(tax.items_named(tax.item("contact_u")->name) == spo::ItemSet{"contact_d", "contact_p", "contact_u"});
  CHECK(tax.cover_by_name({"location_u"}) == spo::ItemSet{"location_d", "location_p", "location_u"});
}

TEST_CASE("serialize and reload gives an equal bundle") {
  const auto& tax = shipped();
  auto again = spo::parse_taxonomy(spo::serialize_taxonomy(tax));
  CHECK(again == tax);
  CHECK(spo::serialize_taxonomy(again) == spo::serialize_taxonomy(tax));
}

TEST_CASE("load errors") {
  SUBCASE("empty") {
    auto doc = shipped_json();
    doc["items"] = json::array();
    CHECK(load_error(doc).find("empty taxonomy") != std::string::npos);
  }
  SUBCASE("category conflict") {
    auto doc = shipped_json();
    for (auto& m : doc["subapi_map"])
      if (m["subapi"] == "getLocation") m["items"] = json::array({"location_d", "location_p"});
    CHECK(load_error(doc).find("duplicate mapping category conflict") != std::string::npos);
  }
  SUBCASE("duplicate id") {
    auto doc = shipped_json();
    doc["items"].push_back(doc["items"][0]);
    CHECK(load_error(doc).find("duplicate item id") != std::string::npos);
  }
  SUBCASE("unknown item in mapping") {
    auto doc = shipped_json();
    doc["subapi_map"][0]["items"] = json::array({"ghost_d"});
    CHECK(load_error(doc).find("ghost_d") != std::string::npos);
  }
  SUBCASE("user-input item behind a subAPI") {
    auto doc = shipped_json();
    doc["subapi_map"][0]["items"] = json::array({"name_u"});
    CHECK_FALSE(load_error(doc).empty());
  }
  SUBCASE("bad schema version") {
    auto doc = shipped_json();
    doc["schema_version"] = 7;
    CHECK_FALSE(load_error(doc).empty());
  }
  SUBCASE("not json") { CHECK_THROWS_AS(spo::parse_taxonomy("{"), spo::LoadError); }
}

TEST_CASE("keyword matching on UI text") {
  const auto& lex = shipped().lexicon("en");
  CHECK(spo::match_keywords("please enter your ID card", lex) == spo::ItemSet{"identity_u"});
  CHECK(spo::match_keywords("search", lex).empty());
  CHECK(spo::match_keywords("bank card number and cardholder", lex) == spo::ItemSet{"property_u"});
  CHECK(spo::match_keywords("Phone   Number", lex) == spo::ItemSet{"contact_u"});
  CHECK(spo::match_keywords("your city", lex) == spo::ItemSet{"location_u"});
  // word boundaries: "age" inside "page" or "image" does not count
  CHECK(spo::match_keywords("next page", lex).empty());
  // plural
  CHECK(spo::match_keywords("addresses", lex) == spo::ItemSet{"location_u"});
  // device-only keywords are not used for UI matching
  CHECK(spo::match_keywords("bluetooth", lex).empty());
  CHECK(spo::match_keywords("bluetooth", lex, spo::KeywordScope::Policy) == spo::ItemSet{"bluetooth_d"});
}
