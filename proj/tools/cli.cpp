#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "retriever.hpp"
#include "spo/pipeline.hpp"

namespace spo {

namespace {

struct Options {
  std::string taxonomy;
  std::string out;
  std::string format = "json";
  std::string basis = "valid-policy";
  std::string locale;
  bool fetch_remote = false;
  std::size_t min_policy_length = 50;
  std::size_t parallelism = 1;
  std::string policy_file;
  ClusterConfig cluster;
  std::string target;
};

void write_out(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw UsageError("cannot write " + o.out);
  f << text;
}

AnalyzeOptions analyze_options(const Options& o) {
  AnalyzeOptions a;
  a.locale = o.locale;
  a.policy.min_length = o.min_policy_length;
  a.policy.fetch_remote = o.fetch_remote;
  if (o.fetch_remote) a.policy.retriever = http_retriever();
  if (!o.policy_file.empty()) {
    if (!std::filesystem::is_regular_file(o.policy_file)) throw UsageError("policy file not found: " + o.policy_file);
    a.external_policy = o.policy_file;
  }
  return a;
}

void require_dir(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_directory(path, ec)) throw UsageError("not a readable directory: " + path);
}

int cmd_analyze(const Options& o, const Taxonomy& tax, std::ostream& out, std::ostream& err) {
  require_dir(o.target);
  ReportFormat fmt = parse_format(o.format);
  AggregateOptions agg;
  agg.basis = parse_spo_basis(o.basis);
  SpoReport r = analyze_app(o.target, tax, analyze_options(o));
  if (r.error) {
    err << "analysis failed: " << *r.error << "\n";
    return 2;
  }
  std::vector<SpoReport> reports{r};
  write_out(o, emit_report(aggregate(reports, tax, agg), reports, fmt, tax), out);
  return 0;
}

int cmd_corpus(const Options& o, const Taxonomy& tax, bool mining, std::ostream& out, std::ostream& err) {
  require_dir(o.target);
  ReportFormat fmt = parse_format(o.format);
  AggregateOptions agg;
  agg.basis = parse_spo_basis(o.basis);
  if (mining) o.cluster.validate();
  CorpusRun run = analyze_corpus(o.target, tax, analyze_options(o), o.parallelism, mining, o.cluster.shingle);
  std::size_t ok = 0;
  for (const auto& r : run.reports) {
    if (r.error)
      err << r.appid << ": " << *r.error << "\n";
    else
      ++ok;
  }
  if (ok == 0) {
    err << "no loadable apps under " << o.target << "\n";
    return 2;
  }
  CorpusStats stats = aggregate(run.reports, tax, agg);
  if (!mining) {
    write_out(o, emit_report(stats, run.reports, fmt, tax), out);
    return 0;
  }
  MiningResult m = spo::mine(run.fingerprints, run.reports, o.cluster);
  if (fmt == ReportFormat::Csv) {
    std::string csv = "kind,id,appid,path\n";
    for (const auto& t : m.templates)
      for (const auto& app : t.members) csv += "template," + std::to_string(t.id) + "," + app + ",\n";
    for (const auto& s : m.sdks)
      for (const auto& [app, path] : s.member_files) csv += "sdk," + std::to_string(s.id) + "," + app + "," + path + "\n";
    write_out(o, csv, out);
  } else {
    write_out(o, emit_report(stats, run.reports, fmt, tax, &m), out);
  }
  return 0;
}

int cmd_policy(const Options& o, const Taxonomy& tax, std::ostream& out) {
  std::ifstream in(o.target, std::ios::binary);
  if (!in) throw UsageError("cannot read " + o.target);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  ReportFormat fmt = parse_format(o.format);
  std::string locale = o.locale.empty() ? detect_locale(text) : o.locale;
  PolicyAnalysis a = analyze_policy_text(text, tax.lexicon(locale), tax.vocabulary(locale), locale);
  ItemSet covered = claim_coverage(a.claims, tax);
  bool valid = policy_valid(text, o.min_policy_length);

  if (fmt == ReportFormat::Json) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    doc["locale"] = locale;
    doc["valid"] = valid;
    doc["length"] = policy_length(text);
    doc["claims"] = a.claims.items;
    doc["covered"] = covered;
    nlohmann::ordered_json cands = nlohmann::ordered_json::array();
    for (const auto& c : a.candidates) {
      nlohmann::ordered_json m = nlohmann::ordered_json::array();
      for (const auto& h : c.matched) m.push_back({{"keyword", h.keyword}, {"item", h.item}});
      cands.push_back({{"sentence", c.sentence},
                       {"text", a.sentences[static_cast<std::size_t>(c.sentence)].text},
                       {"clause", c.clause},
                       {"verdict", to_string(c.verdict)},
                       {"matched", m}});
    }
    doc["candidates"] = cands;
    write_out(o, doc.dump(2) + "\n", out);
  } else if (fmt == ReportFormat::Csv) {
    std::string csv = "sentence,item,verdict\n";
    for (const auto& c : a.candidates)
      for (const auto& h : c.matched)
        csv += std::to_string(c.sentence) + "," + h.item + "," + std::string(to_string(c.verdict)) + "\n";
    write_out(o, csv, out);
  } else {
    std::ostringstream t;
    t << "policy: " << (valid ? "valid" : "invalid") << ", " << a.sentences.size() << " sentences, locale " << locale
      << "\n";
    for (const auto& c : a.candidates) {
      t << "  [" << c.sentence << "] " << to_string(c.verdict) << ":";
      for (const auto& h : c.matched) t << " " << h.item << " (" << h.keyword << ")";
      t << "\n";
    }
    t << "claimed:";
    for (const auto& i : a.claims.items) t << " " << i;
    t << "\ncovered:";
    for (const auto& i : covered) t << " " << i;
    t << "\n";
    write_out(o, t.str(), out);
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Sub-app privacy over-collection checker", "spochecker"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  auto common = [&](CLI::App* sub) {
    sub->add_option("--taxonomy", o.taxonomy, "Taxonomy file (default: $SPO_TAXONOMY or the shipped one)");
    sub->add_option("--out", o.out, "Write the report here instead of stdout");
    sub->add_option("--format", o.format, "json, csv or text")->capture_default_str();
    sub->add_option("--locale", o.locale, "Lexicon locale (default: detected)");
    sub->add_option("--min-policy-length", o.min_policy_length, "Characters a policy needs to count as valid")
        ->capture_default_str();
  };
  auto analysis = [&](CLI::App* sub) {
    sub->add_option("--spo-basis", o.basis, "valid-policy or all")->capture_default_str();
    sub->add_flag("--fetch-remote-policies", o.fetch_remote, "Fetch policies linked by URL");
  };
  auto corpus_opts = [&](CLI::App* sub) {
    sub->add_option("--parallelism", o.parallelism, "Concurrent app analyses")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  };

  auto* analyze = app.add_subcommand("analyze", "Analyse one extracted sub-app");
  analyze->add_option("appdir", o.target, "Package directory")->required();
  analyze->add_option("--policy-file", o.policy_file, "Policy text to use instead of locating one");
  common(analyze);
  analysis(analyze);

  auto* corpus = app.add_subcommand("corpus", "Analyse every sub-app of a corpus directory");
  corpus->add_option("corpus_dir", o.target, "Directory of package directories")->required();
  common(corpus);
  analysis(corpus);
  corpus_opts(corpus);

  auto* mine = app.add_subcommand("mine", "Detect templates and SDKs across a corpus");
  mine->add_option("corpus_dir", o.target, "Directory of package directories")->required();
  common(mine);
  analysis(mine);
  corpus_opts(mine);
  mine->add_option("--theta1", o.cluster.theta1, "Route similarity threshold")->capture_default_str();
  mine->add_option("--theta2", o.cluster.theta2, "Content similarity threshold")->capture_default_str();
  mine->add_option("--theta-sdk", o.cluster.theta_sdk, "SDK file similarity threshold")->capture_default_str();
  mine->add_option("--min-sdk-usage", o.cluster.min_sdk_usage, "SDK files must be used by more apps than this")
      ->capture_default_str();

  auto* policy = app.add_subcommand("policy", "Extract claims from one policy text file");
  policy->add_option("file", o.target, "Policy text")->required();
  common(policy);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    std::filesystem::path tax_path = o.taxonomy.empty() ? default_taxonomy_path() : std::filesystem::path(o.taxonomy);
    if (!std::filesystem::is_regular_file(tax_path)) throw UsageError("taxonomy not found: " + tax_path.string());
    Taxonomy tax = load_taxonomy(tax_path);
    if (*analyze) return cmd_analyze(o, tax, out, err);
    if (*corpus) return cmd_corpus(o, tax, false, out, err);
    if (*mine) return cmd_corpus(o, tax, true, out, err);
    return cmd_policy(o, tax, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const LoadError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace spo
