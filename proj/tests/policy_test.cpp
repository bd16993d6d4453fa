#include <doctest.h>

#include <json.hpp>
#include <random>

#include "spo/policy.hpp"
#include "test_support.hpp"

using namespace spo;

namespace {

ClaimSet claims_of(const std::string& text, const std::string& locale = "en") {
  const Taxonomy& tax = spo::test::shipped();
  return analyze_policy_text(text, tax.lexicon(locale), tax.vocabulary(locale), locale).claims;
}

std::vector<std::string> texts(const std::vector<Sentence>& ss) {
  std::vector<std::string> out;
  for (const auto& s : ss) out.push_back(s.text);
  return out;
}

std::string strip_ws(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

}  // namespace

TEST_CASE("policy: sentence splitting") {
  using V = std::vector<std::string>;
  CHECK(texts(split_sentences("We collect A. We store B.")) == V{"We collect A.", "We store B."});
  CHECK(texts(split_sentences("1) name 2) phone")) == V{"name", "phone"});
  CHECK(split_sentences("").empty());
  CHECK(split_sentences("  \n\n ").empty());
  CHECK(texts(split_sentences("Really? Yes! Fine... done")) == V{"Really?", "Yes!", "Fine...", "done"});
  CHECK(texts(split_sentences("Data, e.g. your name, is kept. Version 2.5 ships.")) ==
        V{"Data, e.g. your name, is kept.", "Version 2.5 ships."});
  CHECK(texts(split_sentences("我们收集姓名。我们不收集地址！好吗？")) == V{"我们收集姓名。", "我们不收集地址！", "好吗？"});
  CHECK(texts(split_sentences("一、收集信息\n（1）姓名\n①手机号\n• city\n- age")) == V{"收集信息", "姓名", "手机号", "city", "age"});
}

TEST_CASE("policy: list items point at their lead-in") {
  auto ss = split_sentences("We collect the following:\n1. your name\n2. your ID number\nThat is all.\n- gender");
  REQUIRE(ss.size() == 5);
  CHECK(ss[0].lead == -1);
  CHECK(ss[1].lead == 0);
  CHECK(ss[2].lead == 0);
  CHECK(ss[3].lead == -1);
  CHECK(ss[4].lead == -1);
  for (std::size_t i = 0; i < ss.size(); ++i) CHECK(ss[i].index == static_cast<int>(i));

  CHECK(claims_of("We collect the following:\n1. your name\n2. your ID number\nThat is all.\n- gender").items ==
        ItemSet{"name_u", "identity_u"});
  CHECK(claims_of("We will not collect:\n(1) your address\n(2) your age").items.empty());
}

TEST_CASE("policy: tokens rejoin to the sentence text") {
  for (const auto& s : split_sentences(
           "We collect your phone number (for login), and won't store it!  我们收集您的姓名，但不收集地址。Line\ttwo.")) {
    std::string joined;
    for (const auto& t : s.tokens) joined += t;
    CHECK(joined == strip_ws(s.text));
  }
  CHECK(tokenize("won't stop") == std::vector<std::string>{"won't", "stop"});
  CHECK(tokenize("姓名,ab") == std::vector<std::string>{"姓", "名", ",", "ab"});
}

TEST_CASE("policy: verdicts per clause") {
  const Taxonomy& tax = spo::test::shipped();
  auto a = analyze_policy_text("We do not collect your address, but we collect your phone number. Please call our contact number.",
                               tax.lexicon("en"), tax.vocabulary("en"));
  REQUIRE(a.candidates.size() == 3);
  CHECK(a.candidates[0].verdict == Verdict::Negated);
  CHECK(a.candidates[0].matched[0].item == "location_u");
  CHECK(a.candidates[1].verdict == Verdict::Claim);
  CHECK(a.candidates[2].verdict == Verdict::NonCollective);
  CHECK(a.candidates[2].sentence == 1);
  CHECK(a.claims.items == ItemSet{"contact_u"});
  CHECK(a.claims.evidence.at("contact_u") == std::vector<int>{0});
  // every claimed item has evidence
  for (const auto& i : a.claims.items) CHECK(!a.claims.evidence.at(i).empty());
}

TEST_CASE("policy: keywords spanning conjunctions stay whole") {
  CHECK(claims_of("We collect longitude and latitude.").items == ItemSet{"location_u"});
  CHECK(claims_of("We collect your political or religious views.").items == ItemSet{"political_u"});
}

TEST_CASE("policy: extraction refuses invalid policies") {
  const Taxonomy& tax = spo::test::shipped();
  PolicyText p;
  p.text = "We collect your name.";
  p.valid = false;
  CHECK_THROWS_WITH_AS(extract_claims(p, tax.lexicon(), tax.vocabulary()), "no valid policy", Error);
  p.valid = true;
  CHECK(extract_claims(p, tax.lexicon(), tax.vocabulary()).items == ItemSet{"name_u"});
}

TEST_CASE("policy: claim coverage by item name") {
  const Taxonomy& tax = spo::test::shipped();
  ClaimSet c;
  c.items = {"location_u", "name_u"};
  CHECK(claim_coverage(c, tax) == ItemSet{"location_d", "location_p", "location_u", "name_u"});
  auto exact = claims_of("We obtain your WeChat-bound phone number for login.");
  CHECK(exact.items == ItemSet{"contact_p"});
  CHECK(exact.exact == ItemSet{"contact_p"});
  CHECK(claim_coverage(exact, tax) == ItemSet{"contact_p"});
  auto both = claims_of("We obtain your WeChat-bound phone number. We also collect your phone number.");
  CHECK(both.items == ItemSet{"contact_p", "contact_u"});
  CHECK(both.exact == ItemSet{"contact_p"});
  CHECK(claim_coverage(both, tax) == ItemSet{"contact_d", "contact_p", "contact_u"});
}

TEST_CASE("policy: locale detection") {
  CHECK(detect_locale("We collect your name.") == "en");
  CHECK(detect_locale("我们收集您的姓名 and ID") == "zh");
  CHECK(detect_locale("") == "en");
}

TEST_CASE("policy: hand-labelled sentence set") {
  auto doc = nlohmann::json::parse(spo::test::slurp(spo::test::fixture_dir() / "policy" / "sentences.json"));
  REQUIRE(doc.size() == 40);
  for (const auto& e : doc) {
    std::string text = e["text"];
    std::string locale = e.value("locale", "en");
    ItemSet want;
    for (const auto& c : e["claims"]) want.insert(c.get<std::string>());
    CAPTURE(text);
    CHECK(claims_of(text, locale).items == want);
  }
}

namespace {

const std::vector<std::string> kClaims = {
    "We collect your name.", "We will obtain your city.", "We store your phone number.",
    "Your photo is uploaded and stored.", "We access your Bluetooth devices.", "We record your height.",
};
const std::vector<std::string> kOther = {
    "We do not collect your address.", "Please call our contact number 400-800.",
    "We never store your ID number.", "Thanks for reading.", "We value your trust, and we act with care.",
    "You may refuse to share your gender.",
};

}  // namespace

TEST_CASE("policy: appending a claim sentence never shrinks the claim set") {
  std::mt19937 rng(23);
  for (int round = 0; round < 200; ++round) {
    std::string text;
    int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      const auto& pool = rng() % 2 ? kClaims : kOther;
      text += pool[rng() % pool.size()] + " ";
    }
    ItemSet before = claims_of(text).items;
    std::string extra = kClaims[rng() % kClaims.size()];
    ItemSet after = claims_of(text + extra).items;
    CAPTURE(text);
    CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
    ItemSet alone = claims_of(extra).items;
    CHECK(std::includes(after.begin(), after.end(), alone.begin(), alone.end()));
    CHECK(claims_of(text + extra) == claims_of(text + extra));
  }
}

TEST_CASE("policy: negation stays in its clause across contrast conjunctions") {
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"name", "name_u"}, {"phone number", "contact_u"}, {"address", "location_u"}, {"ID number", "identity_u"},
      {"gender", "gender_u"}, {"bank card", "property_u"}, {"height", "health_u"}, {"birthday", "age_u"},
  };
  for (const auto& conj : {"but", "however", "whereas"})
    for (const auto& [a, ia] : pairs)
      for (const auto& [b, ib] : pairs) {
        if (ia == ib) continue;
        std::string s1 = "We do not collect your " + a + ", " + conj + " we collect your " + b + ".";
        std::string s2 = "We collect your " + a + " " + conj + " we never collect your " + b + ".";
        CAPTURE(s1);
        CHECK(claims_of(s1).items == ItemSet{ib});
        CAPTURE(s2);
        CHECK(claims_of(s2).items == ItemSet{ia});
      }
}
