#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "spo/spo.hpp"
#include "test_support.hpp"

namespace spo::test {

/// Shipped taxonomy with a protection level on every item used below.
inline Taxonomy protection_taxonomy() {
  auto doc = nlohmann::json::parse(slurp(default_taxonomy_path()));
  doc["protection_levels"] = nlohmann::json::array({
      {{"item", "biometric_d"}, {"level", "fully_protected"}},
      {{"item", "location_d"}, {"level", "partially_protected"}},
      {{"item", "device_info_d"}, {"level", "not_protected"}},
      {{"item", "contact_p"}, {"level", "not_protected"}},
      {{"item", "contact_u"}, {"level", "not_protected"}},
  });
  return parse_taxonomy(doc.dump());
}

/// One valid-policy report per collection behaviour, split so that the
/// category and protection-level totals equal the published counts:
///   device 2444/389, platform 125/4, user input 2420/388
///   not protected 3472/607, partially 1420/171, fully 97/3
inline std::vector<SpoReport> published_count_reports() {
  struct Block {
    const char* item;
    int collected;
    int spo;
  };
  const Block blocks[] = {
      {"biometric_d", 97, 3},     // device, fully
      {"location_d", 1420, 171},  // device, partially
      {"device_info_d", 927, 215},  // device, not
      {"contact_p", 125, 4},      // platform, not
      {"contact_u", 2420, 388},   // user input, not
  };
  std::vector<SpoReport> out;
  int n = 0;
  for (const auto& b : blocks)
    for (int i = 0; i < b.collected; ++i) {
      SpoReport r;
      r.appid = "wxsyn" + std::to_string(n++);
      r.policy_status = PolicyStatus::Valid;
      r.s_collect = {b.item};
      if (i < b.spo) r.s_spo = {b.item};
      else r.s_claim = r.s_claim_covered = {b.item};
      out.push_back(std::move(r));
    }
  return out;
}

}  // namespace spo::test
