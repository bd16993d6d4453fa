#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spo/flow.hpp"
#include "spo/miner.hpp"
#include "spo/package.hpp"
#include "spo/policy.hpp"
#include "spo/render.hpp"
#include "spo/script.hpp"
#include "spo/spo.hpp"
#include "spo/taxonomy.hpp"

namespace spo {

struct AnalyzeOptions {
  std::string locale;  // empty: detected from the policy text
  std::optional<std::filesystem::path> external_policy;
  PolicyLocateOptions policy;
};

/// Every intermediate result of one app's analysis. Not movable: the
/// index and graph point into the package and the parsed scripts.
struct AppAnalysis {
  SubAppPackage pkg;
  ParsedScripts scripts;
  std::unique_ptr<ScriptIndex> index;
  ScriptModels models;
  RenderAnalysis render;
  CallGraph graph;
  std::vector<SourcePoint> sources;
  TaintState state;
  std::vector<TaintFlow> flows;
  std::optional<PolicyAnalysis> policy;
  SpoReport report;

  AppAnalysis() = default;
  AppAnalysis(const AppAnalysis&) = delete;
  AppAnalysis& operator=(const AppAnalysis&) = delete;
};

/// Runs every stage on a loaded package. Throws LoadError only from
/// package loading; later problems become warnings.
std::unique_ptr<AppAnalysis> run_analysis(const std::filesystem::path& dir, const Taxonomy& tax,
                                          const AnalyzeOptions& opts = {});

/// Report for one app; load failures are recorded in `error`.
SpoReport analyze_app(const std::filesystem::path& dir, const Taxonomy& tax, const AnalyzeOptions& opts = {});

/// Package directories of a corpus (every subdirectory holding app.json,
/// or any subdirectory when none does), sorted by name.
std::vector<std::filesystem::path> list_apps(const std::filesystem::path& corpus);

struct CorpusRun {
  std::vector<SpoReport> reports;            // in list_apps order
  std::vector<AppFingerprint> fingerprints;  // loadable apps only
};

/// Analyses every app with at most `parallelism` workers. Per-app failures
/// are recorded and do not stop the run.
CorpusRun analyze_corpus(const std::filesystem::path& corpus, const Taxonomy& tax, const AnalyzeOptions& opts,
                         std::size_t parallelism = 1, bool fingerprints = false, std::size_t shingle_k = 5);

}  // namespace spo
