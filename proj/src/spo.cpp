#include "spo/spo.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "spo/miner.hpp"

namespace spo {

using ojson = nlohmann::ordered_json;

SpoReport compute_spo(const ItemSet& collect, const ClaimSet& claims, PolicyStatus status, const Taxonomy& tax) {
  SpoReport r;
  r.policy_status = status;
  r.s_collect = collect;
  if (status == PolicyStatus::Valid) {
    r.s_claim = claims.items;
    r.s_claim_covered = claim_coverage(claims, tax);
    r.claim_evidence = claims.evidence;
  }
  std::set_difference(collect.begin(), collect.end(), r.s_claim_covered.begin(), r.s_claim_covered.end(),
                      std::inserter(r.s_spo, r.s_spo.end()));
  return r;
}

std::string_view to_string(SpoBasis b) { return b == SpoBasis::All ? "all" : "valid-policy"; }

SpoBasis parse_spo_basis(std::string_view s) {
  if (s == "valid-policy") return SpoBasis::ValidPolicy;
  if (s == "all") return SpoBasis::All;
  throw UsageError("unknown spo basis '" + std::string(s) + "' (expected valid-policy or all)");
}

std::optional<double> RateRow::rate() const {
  if (collected == 0) return std::nullopt;
  return static_cast<double>(spo) / static_cast<double>(collected);
}

std::string PopularityBucket::label() const {
  if (!high) return ">=" + std::to_string(low);
  if (low == 0) return "<" + std::to_string(*high);
  return std::to_string(low) + "-" + std::to_string(*high - 1);
}

std::optional<double> PopularityBucket::rate() const {
  if (apps == 0) return std::nullopt;
  return static_cast<double>(valid) / static_cast<double>(apps);
}

std::string format_rate(std::optional<double> rate) {
  if (!rate) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *rate * 100.0);
  return buf;
}

CorpusStats aggregate(const std::vector<SpoReport>& reports, const Taxonomy& tax, const AggregateOptions& opts) {
  CorpusStats st;
  st.basis = opts.basis;
  for (const auto& item : tax.items()) {
    st.items[item.id];
    st.categories[std::string(to_string(item.category))];
  }
  for (auto level : {ProtectionLevel::NotProtected, ProtectionLevel::PartiallyProtected, ProtectionLevel::FullyProtected})
    st.protection[std::string(to_string(level))];
  st.protection["unassigned"];

  std::vector<std::uint64_t> cuts = opts.buckets;
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::uint64_t low = 0;
  for (auto c : cuts) {
    if (c == 0) continue;
    st.popularity.push_back({low, c, 0, 0});
    low = c;
  }
  st.popularity.push_back({low, std::nullopt, 0, 0});
  for (auto s : {PolicyStatus::Valid, PolicyStatus::Invalid, PolicyStatus::Missing})
    st.policy_status[std::string(to_string(s))] = 0;

  std::size_t analysed = 0, valid = 0;
  for (const auto& r : reports) {
    ++st.apps;
    if (r.error) {
      ++st.failed;
      continue;
    }
    ++analysed;
    ++st.policy_status[std::string(to_string(r.policy_status))];
    const bool is_valid = r.policy_status == PolicyStatus::Valid;
    valid += is_valid;
    for (auto& b : st.popularity)
      if (r.meta.recently_used >= b.low && (!b.high || r.meta.recently_used < *b.high)) {
        ++b.apps;
        b.valid += is_valid;
      }
    if (opts.basis == SpoBasis::ValidPolicy && !is_valid) continue;
    ++st.counted;
    st.apps_with_collection += !r.s_collect.empty();
    st.apps_with_spo += !r.s_spo.empty();
    ++st.spo_histogram[r.s_spo.size()];
    for (const auto& id : r.s_collect) {
      const PrivacyItem* item = tax.item(id);
      if (!item) continue;
      RateRow one{1, r.s_spo.count(id) ? 1u : 0u};
      st.items[id] += one;
      st.categories[std::string(to_string(item->category))] += one;
      auto level = tax.protection(id);
      st.protection[level ? std::string(to_string(*level)) : "unassigned"] += one;
      st.total += one;
    }
  }
  if (analysed) st.policy_rate = static_cast<double>(valid) / static_cast<double>(analysed);
  return st;
}

ReportFormat parse_format(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "text") return ReportFormat::Text;
  throw UsageError("unknown format '" + std::string(s) + "' (expected json, csv or text)");
}

namespace {

ojson rate_json(std::optional<double> r) { return r ? ojson(*r) : ojson(nullptr); }

ojson row_json(const RateRow& row) {
  return {{"collected", row.collected}, {"spo", row.spo}, {"spo_rate", rate_json(row.rate())}};
}

ojson loc_json(const SourceLocation& l) { return {{"file", l.file}, {"line", l.span.line}, {"col", l.span.col}}; }

std::vector<const SpoReport*> by_appid(const std::vector<SpoReport>& reports) {
  std::vector<const SpoReport*> out;
  for (const auto& r : reports) out.push_back(&r);
  std::stable_sort(out.begin(), out.end(), [](const SpoReport* a, const SpoReport* b) { return a->appid < b->appid; });
  return out;
}

ojson app_json(const SpoReport& r) {
  ojson a;
  a["appid"] = r.appid;
  a["developer"] = r.meta.developer;
  a["category"] = r.meta.category;
  a["recently_used"] = r.meta.recently_used;
  if (r.error) {
    a["error"] = *r.error;
    return a;
  }
  a["policy_status"] = to_string(r.policy_status);
  a["s_collect"] = r.s_collect;
  a["s_claim"] = r.s_claim;
  a["s_claim_covered"] = r.s_claim_covered;
  a["s_spo"] = r.s_spo;
  ojson flows = ojson::array();
  for (const auto& f : r.flow_evidence) {
    ojson path = ojson::array();
    for (const auto& p : f.path) path.push_back(loc_json(p));
    flows.push_back({{"source_kind", f.source_kind},
                     {"source_api", f.source_api},
                     {"source", loc_json(f.source)},
                     {"sink", f.sink},
                     {"sink_at", loc_json(f.sink_at)},
                     {"items", f.items},
                     {"url", f.url},
                     {"path", path}});
  }
  a["flows"] = flows;
  ojson ev = ojson::object();
  for (const auto& [item, idx] : r.claim_evidence) {
    ojson list = ojson::array();
    for (int i : idx) {
      auto it = r.claim_sentences.find(i);
      list.push_back({{"sentence", i}, {"text", it == r.claim_sentences.end() ? "" : it->second}});
    }
    ev[item] = list;
  }
  a["claim_evidence"] = ev;
  ojson warn = ojson::array();
  for (const auto& w : r.warnings) warn.push_back({{"stage", w.stage}, {"where", w.where}, {"message", w.message}});
  a["warnings"] = warn;
  return a;
}

ojson mining_json(const MiningResult& m) {
  ojson out;
  ojson t = ojson::array();
  for (const auto& c : m.templates)
    t.push_back({{"id", c.id}, {"representative", c.representative}, {"members", c.members}, {"developers", c.developers}});
  out["templates"] = t;
  ojson s = ojson::array();
  for (const auto& c : m.sdks) {
    ojson files = ojson::array();
    for (const auto& [app, path] : c.member_files) files.push_back({{"appid", app}, {"path", path}});
    s.push_back({{"id", c.id}, {"name", c.name}, {"file_names", c.file_names}, {"usage_count", c.usage_count},
                 {"member_files", files}});
  }
  out["sdks"] = s;
  ojson at = ojson::object();
  ojson ta = ojson::array();
  for (const auto& a : m.attribution.templates)
    ta.push_back({{"template", a.template_id}, {"apps", a.apps}, {"mean_collected", a.mean_collected},
                  {"mean_spo", a.mean_spo}});
  at["templates"] = ta;
  at["non_template"] = {{"apps", m.attribution.others.apps},
                        {"mean_collected", m.attribution.others.mean_collected},
                        {"mean_spo", m.attribution.others.mean_spo}};
  ojson sa = ojson::array();
  for (const auto& a : m.attribution.sdks)
    sa.push_back({{"sdk", a.sdk_id}, {"flows", a.flows}, {"spo_flows", a.spo_flows}, {"items", a.items}});
  at["sdks"] = sa;
  out["attribution"] = at;
  out["multi_membership"] = m.memberships;
  return out;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string join(const ItemSet& s) {
  std::string out;
  for (const auto& i : s) out += (out.empty() ? "" : ", ") + i;
  return out.empty() ? "-" : out;
}

std::string text_report(const CorpusStats& st, const std::vector<SpoReport>& reports, const Taxonomy& tax,
                        const MiningResult* m) {
  std::ostringstream o;
  o << "SPO report (basis: " << to_string(st.basis) << ")\n";
  o << "apps: " << st.apps << "  failed: " << st.failed << "  counted: " << st.counted
    << "  with collection: " << st.apps_with_collection << "  with SPO: " << st.apps_with_spo << "\n";
  o << "policies: valid " << st.policy_status.at("valid") << ", invalid " << st.policy_status.at("invalid")
    << ", missing " << st.policy_status.at("missing") << "  providing rate " << format_rate(st.policy_rate) << "\n";
  for (const auto& b : st.popularity)
    o << "  recently used " << b.label() << ": " << b.valid << "/" << b.apps << " (" << format_rate(b.rate()) << ")\n";
  o << "\ncollected " << st.total.collected << ", over-collected " << st.total.spo << ", SPO rate "
    << format_rate(st.total.rate()) << "\n";
  o << "\nby category\n";
  for (const auto& [k, row] : st.categories)
    o << "  " << k << ": " << row.collected << " / " << row.spo << " (" << format_rate(row.rate()) << ")\n";
  o << "by protection level\n";
  for (const auto& [k, row] : st.protection)
    o << "  " << k << ": " << row.collected << " / " << row.spo << " (" << format_rate(row.rate()) << ")\n";
  o << "by item\n";
  for (const auto& item : tax.items()) {
    const RateRow& row = st.items.at(item.id);
    if (row.collected == 0) continue;
    o << "  " << item.id << ": " << row.collected << " / " << row.spo << " (" << format_rate(row.rate()) << ")\n";
  }
  o << "\napps\n";
  for (const SpoReport* r : by_appid(reports)) {
    if (r->error) {
      o << "  " << r->appid << ": failed: " << *r->error << "\n";
      continue;
    }
    o << "  " << r->appid << " [" << to_string(r->policy_status) << "] collect: " << join(r->s_collect)
      << "; claim: " << join(r->s_claim) << "; SPO: " << join(r->s_spo) << "\n";
  }
  if (m) {
    o << "\ntemplates: " << m->templates.size() << "\n";
    for (const auto& c : m->templates) {
      o << "  #" << c.id << " " << c.representative << ": " << c.members.size() << " apps, " << c.developers.size()
        << " developers\n";
    }
    for (const auto& a : m->attribution.templates)
      o << "  #" << a.template_id << " mean collected " << fixed2(a.mean_collected) << ", mean SPO "
        << fixed2(a.mean_spo) << "\n";
    o << "  non-template apps (" << m->attribution.others.apps << ") mean collected "
      << fixed2(m->attribution.others.mean_collected) << ", mean SPO " << fixed2(m->attribution.others.mean_spo)
      << "\n";
    o << "SDKs: " << m->sdks.size() << "\n";
    for (std::size_t i = 0; i < m->sdks.size(); ++i) {
      const auto& c = m->sdks[i];
      o << "  #" << c.id << " " << c.name << ": " << c.file_names.size() << " files, used by " << c.usage_count
        << " apps";
      if (i < m->attribution.sdks.size())
        o << ", " << m->attribution.sdks[i].flows << " flows (" << m->attribution.sdks[i].spo_flows << " SPO)";
      o << "\n";
    }
  }
  return o.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::string emit_report(const CorpusStats& st, const std::vector<SpoReport>& reports, ReportFormat format,
                        const Taxonomy& tax, const MiningResult* mining) {
  if (format == ReportFormat::Csv) {
    std::string out = "appid,item,status\n";
    for (const SpoReport* r : by_appid(reports)) {
      auto rows = [&](const ItemSet& s, const char* status) {
        for (const auto& i : s) out += csv_field(r->appid) + "," + i + "," + status + "\n";
      };
      rows(r->s_collect, "collected");
      rows(r->s_claim, "claimed");
      rows(r->s_spo, "spo");
    }
    return out;
  }
  if (format == ReportFormat::Text) return text_report(st, reports, tax, mining);

  ojson doc;
  doc["schema_version"] = 1;
  ojson corpus;
  corpus["spo_basis"] = to_string(st.basis);
  corpus["apps"] = st.apps;
  corpus["failed"] = st.failed;
  corpus["counted"] = st.counted;
  corpus["apps_with_collection"] = st.apps_with_collection;
  corpus["apps_with_spo"] = st.apps_with_spo;
  corpus["total"] = row_json(st.total);
  ojson cats = ojson::object();
  for (const auto& [k, row] : st.categories) cats[k] = row_json(row);
  corpus["categories"] = cats;
  ojson prot = ojson::object();
  for (const auto& [k, row] : st.protection) prot[k] = row_json(row);
  corpus["protection_levels"] = prot;
  ojson hist = ojson::object();
  for (const auto& [k, n] : st.spo_histogram) hist[std::to_string(k)] = n;
  corpus["spo_histogram"] = hist;
  ojson pol;
  for (const auto& [k, n] : st.policy_status) pol[k] = n;
  pol["providing_rate"] = rate_json(st.policy_rate);
  ojson buckets = ojson::array();
  for (const auto& b : st.popularity)
    buckets.push_back({{"recently_used", b.label()}, {"apps", b.apps}, {"valid", b.valid}, {"rate", rate_json(b.rate())}});
  pol["by_popularity"] = buckets;
  corpus["policy"] = pol;
  doc["corpus"] = corpus;

  ojson items = ojson::array();
  for (const auto& item : tax.items()) {
    const RateRow& row = st.items.at(item.id);
    auto level = tax.protection(item.id);
    items.push_back({{"id", item.id},
                     {"name", item.name},
                     {"category", to_string(item.category)},
                     {"protection", level ? ojson(to_string(*level)) : ojson(nullptr)},
                     {"collected", row.collected},
                     {"spo", row.spo},
                     {"spo_rate", rate_json(row.rate())}});
  }
  doc["items"] = items;
  ojson apps = ojson::array();
  for (const SpoReport* r : by_appid(reports)) apps.push_back(app_json(*r));
  doc["apps"] = apps;
  if (mining) {
    ojson m = mining_json(*mining);
    doc["templates"] = m["templates"];
    doc["sdks"] = m["sdks"];
    doc["attribution"] = m["attribution"];
    doc["multi_membership"] = m["multi_membership"];
  }
  return doc.dump(2) + "\n";
}

}  // namespace spo
