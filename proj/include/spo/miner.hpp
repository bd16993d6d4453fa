#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "spo/package.hpp"
#include "spo/spo.hpp"

namespace spo {

struct ClusterConfig {
  double theta1 = 0.9;     // route similarity
  double theta2 = 0.9;     // content similarity
  double theta_sdk = 0.95;
  std::size_t min_sdk_usage = 100;  // an SDK file must be used by more apps than this
  std::size_t shingle = 5;

  void validate() const;  // throws UsageError
};

/// Multiset of token shingles.
using Shingles = std::map<std::string, std::size_t>;

/// k-token shingles of a source text; a text shorter than k tokens yields
/// one shingle holding all of them.
Shingles shingle(std::string_view text, std::size_t k = 5);
std::size_t shingle_count(const Shingles& s);

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);
/// Multiset Jaccard: sum of minimum counts over sum of maximum counts.
double jaccard(const Shingles& a, const Shingles& b);

struct AppFingerprint {
  std::string appid;
  std::set<std::string> rt;                // page routes
  std::map<std::string, Shingles> ctn;     // script and markup files
  std::string dev;

  friend bool operator==(const AppFingerprint&, const AppFingerprint&) = default;
};

AppFingerprint fingerprint(const SubAppPackage& pkg, std::size_t k = 5);

double route_similarity(const AppFingerprint& a, const AppFingerprint& b);
/// Size-weighted mean of per-file similarity over the union of file paths;
/// a file present on one side only contributes 0 with its own size.
double content_similarity(const AppFingerprint& a, const AppFingerprint& b);

struct TemplateCluster {
  int id = 0;
  std::vector<std::string> members;
  std::set<std::string> developers;
  std::string representative;

  friend bool operator==(const TemplateCluster&, const TemplateCluster&) = default;
};

/// Single greedy pass in appid order. An app joins every cluster whose
/// founder it matches on both levels and founds a new cluster only when it
/// matches none. Clusters with fewer than two members or two developers
/// are dropped.
std::vector<TemplateCluster> detect_templates(std::vector<AppFingerprint> fps, const ClusterConfig& cfg);

/// Files sharing a basename whose contents agree pairwise.
struct SdkFileCluster {
  std::string file_name;
  std::vector<std::pair<std::string, std::string>> member_files;  // (appid, path)
  std::size_t usage_count = 0;                                     // distinct apps

  friend bool operator==(const SdkFileCluster&, const SdkFileCluster&) = default;
};

/// Script files grouped by basename, clustered first-fit in (appid, path)
/// order, kept when used by more than min_sdk_usage apps.
std::vector<SdkFileCluster> detect_sdk_files(const std::vector<AppFingerprint>& fps, const ClusterConfig& cfg);

struct SdkCluster {
  int id = 0;
  std::string name;  // directory shared by the files, or the file name
  std::vector<std::string> file_names;
  std::vector<std::pair<std::string, std::string>> member_files;
  std::size_t usage_count = 0;

  friend bool operator==(const SdkCluster&, const SdkCluster&) = default;
};

/// File clusters merged by the directory their files live in.
std::vector<SdkCluster> detect_sdks(const std::vector<AppFingerprint>& fps, const ClusterConfig& cfg);

struct TemplateAttribution {
  int template_id = 0;
  std::size_t apps = 0;
  double mean_collected = 0;
  double mean_spo = 0;

  friend bool operator==(const TemplateAttribution&, const TemplateAttribution&) = default;
};

struct SdkAttribution {
  int sdk_id = 0;
  std::size_t flows = 0;      // flows sourced inside the SDK's files
  std::size_t spo_flows = 0;  // of those, flows carrying an over-collected item
  ItemSet items;

  friend bool operator==(const SdkAttribution&, const SdkAttribution&) = default;
};

struct Attribution {
  std::vector<TemplateAttribution> templates;
  TemplateAttribution others;  // apps in no template; template_id -1
  std::vector<SdkAttribution> sdks;

  friend bool operator==(const Attribution&, const Attribution&) = default;
};

/// UI-sourced flows are never attributed to SDKs.
Attribution attribute_spo(const std::vector<TemplateCluster>& templates, const std::vector<SdkCluster>& sdks,
                          const std::vector<SpoReport>& reports);

struct MiningResult {
  std::vector<TemplateCluster> templates;
  std::vector<SdkCluster> sdks;
  Attribution attribution;
  std::map<std::string, std::size_t> memberships;  // apps in more than one template

  friend bool operator==(const MiningResult&, const MiningResult&) = default;
};

MiningResult mine(const std::vector<AppFingerprint>& fps, const std::vector<SpoReport>& reports,
                  const ClusterConfig& cfg);

}  // namespace spo
