#include "spo/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace spo {

namespace {

PolicyVocabulary all_indicators(const Taxonomy& tax) {
  PolicyVocabulary v = tax.vocabulary("en");
  for (const auto& [locale, voc] : tax.vocabularies())
    for (const auto& ind : voc.indicators)
      if (std::find(v.indicators.begin(), v.indicators.end(), ind) == v.indicators.end()) v.indicators.push_back(ind);
  return v;
}

void append(Diagnostics& to, const Diagnostics& from) { to.insert(to.end(), from.begin(), from.end()); }

}  // namespace

std::unique_ptr<AppAnalysis> run_analysis(const std::filesystem::path& dir, const Taxonomy& tax,
                                          const AnalyzeOptions& opts) {
  auto a = std::make_unique<AppAnalysis>();
  a->pkg = load_package(dir);
  a->pkg.policies = locate_policies(a->pkg, all_indicators(tax), opts.external_policy, opts.policy);

  a->scripts = parse_package_scripts(a->pkg);
  a->index = std::make_unique<ScriptIndex>(a->scripts, a->pkg, &tax);
  a->models = extract_models(*a->index, a->pkg);

  std::string policy_text;
  for (const auto& p : a->pkg.policies)
    if (p.valid) policy_text += (policy_text.empty() ? "" : "\n") + p.text;
  std::string locale = opts.locale;
  if (locale.empty()) {
    std::string sample;
    for (const auto& p : a->pkg.pages()) sample += p->render_doc;
    locale = detect_locale(policy_text.empty() ? sample : policy_text);
  }

  a->render = analyze_render(a->pkg, &a->models, tax.lexicon(locale));
  a->graph = build_call_graph(*a->index, a->models, a->render.bindings, tax);
  a->sources = mark_sources(a->graph, *a->index, a->models, a->render.uips, tax);
  a->state = propagate(a->graph, *a->index, a->sources, tax);
  a->flows = find_flows(a->state, a->graph, *a->index, tax);

  PolicyStatus status = policy_status(a->pkg.policies);
  ClaimSet claims;
  if (status == PolicyStatus::Valid) {
    a->policy = analyze_policy_text(policy_text, tax.lexicon(locale), tax.vocabulary(locale), locale);
    claims = a->policy->claims;
  }

  SpoReport& r = a->report;
  r = compute_spo(collect_set(a->flows), claims, status, tax);
  r.appid = a->pkg.appid;
  r.meta = a->pkg.meta;
  for (const auto& f : a->flows) r.flow_evidence.push_back(describe(f, *a->index));
  std::sort(r.flow_evidence.begin(), r.flow_evidence.end());
  if (a->policy)
    for (const auto& [item, idx] : r.claim_evidence)
      for (int i : idx) r.claim_sentences[i] = a->policy->sentences[static_cast<std::size_t>(i)].text;

  append(r.warnings, a->pkg.warnings);
  for (const auto& [file, msg] : a->scripts.errors) r.warnings.push_back({"script", file, "script excluded: " + msg});
  append(r.warnings, a->models.warnings);
  append(r.warnings, a->render.warnings);
  if (a->state.iterations >= 10000) r.warnings.push_back({"flow", "", "fixpoint iteration bound reached"});
  std::sort(r.warnings.begin(), r.warnings.end());
  r.warnings.erase(std::unique(r.warnings.begin(), r.warnings.end()), r.warnings.end());
  return a;
}

SpoReport analyze_app(const std::filesystem::path& dir, const Taxonomy& tax, const AnalyzeOptions& opts) {
  try {
    return run_analysis(dir, tax, opts)->report;
  } catch (const Error& e) {
    SpoReport r;
    r.appid = dir.filename().string();
    r.error = e.what();
    return r;
  }
}

std::vector<std::filesystem::path> list_apps(const std::filesystem::path& corpus) {
  std::vector<std::filesystem::path> all, with_config;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(corpus, ec)) {
    if (!e.is_directory()) continue;
    all.push_back(e.path());
    if (std::filesystem::exists(e.path() / "app.json")) with_config.push_back(e.path());
  }
  auto& out = with_config.empty() ? all : with_config;
  std::sort(out.begin(), out.end());
  return out;
}

CorpusRun analyze_corpus(const std::filesystem::path& corpus, const Taxonomy& tax, const AnalyzeOptions& opts,
                         std::size_t parallelism, bool fingerprints, std::size_t shingle_k) {
  auto apps = list_apps(corpus);
  std::vector<SpoReport> reports(apps.size());
  std::vector<std::optional<AppFingerprint>> fps(apps.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < apps.size();) {
      try {
        auto a = run_analysis(apps[i], tax, opts);
        reports[i] = std::move(a->report);
        if (fingerprints) fps[i] = fingerprint(a->pkg, shingle_k);
      } catch (const std::exception& e) {
        reports[i].appid = apps[i].filename().string();
        reports[i].error = e.what();
      }
    }
  };
  std::size_t n = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(apps.size(), 1));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  CorpusRun run;
  run.reports = std::move(reports);
  for (auto& f : fps)
    if (f) run.fingerprints.push_back(std::move(*f));
  return run;
}

}  // namespace spo
