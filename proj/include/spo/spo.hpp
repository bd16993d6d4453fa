#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spo/common.hpp"
#include "spo/flow.hpp"
#include "spo/package.hpp"
#include "spo/policy.hpp"
#include "spo/taxonomy.hpp"

namespace spo {

/// Bad command-line or report option.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct SpoReport {
  std::string appid;
  AppMeta meta;
  PolicyStatus policy_status = PolicyStatus::Missing;
  ItemSet s_collect;
  ItemSet s_claim;          // items the policy names
  ItemSet s_claim_covered;  // after the same-name rule
  ItemSet s_spo;
  std::vector<FlowRecord> flow_evidence;
  std::map<std::string, std::vector<int>> claim_evidence;
  std::map<int, std::string> claim_sentences;  // sentence index -> text, for evidence
  Diagnostics warnings;
  std::optional<std::string> error;  // analysis failed; sets are empty

  friend bool operator==(const SpoReport&, const SpoReport&) = default;
};

/// S_spo = S_collect minus the coverage of the claims. Claims only count
/// when the policy is valid.
SpoReport compute_spo(const ItemSet& collect, const ClaimSet& claims, PolicyStatus status, const Taxonomy& tax);

enum class SpoBasis { ValidPolicy, All };

std::string_view to_string(SpoBasis b);
SpoBasis parse_spo_basis(std::string_view s);  // throws UsageError

struct RateRow {
  std::size_t collected = 0;
  std::size_t spo = 0;

  /// spo / collected, or nullopt when nothing was collected.
  std::optional<double> rate() const;
  RateRow& operator+=(const RateRow& o) {
    collected += o.collected;
    spo += o.spo;
    return *this;
  }
  friend bool operator==(const RateRow&, const RateRow&) = default;
};

struct PopularityBucket {
  std::uint64_t low = 0;
  std::optional<std::uint64_t> high;  // exclusive
  std::size_t apps = 0;
  std::size_t valid = 0;

  std::string label() const;
  std::optional<double> rate() const;
  friend bool operator==(const PopularityBucket&, const PopularityBucket&) = default;
};

struct CorpusStats {
  SpoBasis basis = SpoBasis::ValidPolicy;
  std::size_t apps = 0;      // every report
  std::size_t failed = 0;    // reports carrying an error
  std::size_t counted = 0;   // reports entering the item totals under `basis`
  std::size_t apps_with_collection = 0;
  std::size_t apps_with_spo = 0;
  RateRow total;
  std::map<std::string, RateRow> items;       // every taxonomy item
  std::map<std::string, RateRow> categories;  // device / platform / user_input
  std::map<std::string, RateRow> protection;  // by level; items without one under "unassigned"
  std::map<std::size_t, std::size_t> spo_histogram;  // |s_spo| -> apps
  std::map<std::string, std::size_t> policy_status;  // over analysed apps
  std::vector<PopularityBucket> popularity;
  std::optional<double> policy_rate;  // valid policies / analysed apps

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

struct AggregateOptions {
  SpoBasis basis = SpoBasis::ValidPolicy;
  std::vector<std::uint64_t> buckets{1000, 10000, 100000};  // recently_used thresholds
};

CorpusStats aggregate(const std::vector<SpoReport>& reports, const Taxonomy& tax, const AggregateOptions& opts = {});

enum class ReportFormat { Json, Csv, Text };

ReportFormat parse_format(std::string_view s);  // throws UsageError

struct MiningResult;

/// Deterministic serialization; apps are ordered by appid.
std::string emit_report(const CorpusStats& stats, const std::vector<SpoReport>& reports, ReportFormat format,
                        const Taxonomy& tax, const MiningResult* mining = nullptr);

/// Percentage with two decimals ("15.65%"), "n/a" for undefined rates.
std::string format_rate(std::optional<double> rate);

}  // namespace spo
