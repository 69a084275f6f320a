#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "numgame/loop.hpp"

namespace numgame {

struct GridRow {
  std::string concept_id;
  Tier tier = Tier::Easy;
  PolicyKind policy = PolicyKind::EIG;
  std::uint64_t seed = 0;
  OutcomeKind outcome = OutcomeKind::DNF;
  int queries = 0; // meaningful only when converged
  bool correct = false;
};

struct CellSummary {
  std::string concept_id;
  Tier tier = Tier::Easy;
  PolicyKind policy = PolicyKind::EIG;
  int seeds = 0;
  int finished = 0;
  int dnf_count = 0;
  int aborted_count = 0;
  int correct_count = 0;
  /// Median over converged seeds; empty when no seed converged.
  std::optional<double> median_queries;
};

struct GridResult {
  std::vector<GridRow> rows;   // sorted by (tier, concept, policy, seed)
  std::vector<CellSummary> cells;
};

double median(std::vector<double> v);

GridResult aggregate(const std::vector<RunRecord>& records);

struct MismatchPoint {
  PolicyKind policy = PolicyKind::EIG;
  int iteration = 0;
  int events = 0;
  double parse_valid_rate = 0.0;
  double consistent_rate = 0.0;
  double novel_rate = 0.0;
  double ess = 0.0;
  double map_confidence = 0.0;
};

struct MismatchReport {
  std::vector<MismatchPoint> series; // sorted by (policy, iteration)
  std::map<PolicyKind, double> mean_consistent_rate_by_policy; // only policies with events
  std::map<PolicyKind, int> events_by_policy;
  std::map<PolicyKind, double> dnf_rate_by_policy;
};

/// Rejuvenation events are iterations with rejuvenated set; the initial proposal round is not one.
MismatchReport mismatch_report(const std::vector<RunRecord>& records);

std::vector<std::pair<int, double>> nll_series(const RunRecord& record);

std::string results_csv(const GridResult& grid);
std::string nll_csv(const std::vector<RunRecord>& records);
std::string mismatch_csv(const MismatchReport& report);

/// Queries-to-convergence table grouped by tier, one column per policy present.
std::string tier_table(const GridResult& grid);
/// Per-tier winner (lowest median over that tier's converged runs), DNF and correct counts.
std::string tier_findings(const GridResult& grid);
std::string mismatch_summary(const MismatchReport& report);

} // namespace numgame
