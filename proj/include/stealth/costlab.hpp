#pragma once

// Cost accounting over traces: price a ledger, aggregate traces into
// median-distance curves, and rank attacks by the cost of reaching a
// target distance.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stealth/trace.hpp"

namespace stealth {

struct CostModel {
  double c0 = 0.0;         // per query (every query, flagged or not)
  double c_flagged = 1.0;  // additionally per flagged query

  void validate() const;
};

double cost_of(std::int64_t total, std::int64_t flagged, const CostModel& m);
double cost_of(const QueryLedger& ledger, const CostModel& m);

struct CurvePoint {
  std::int64_t budget = 0;  // flagged queries
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  // Lower median of the total queries each trace had spent when it reached
  // its best distance within the budget.
  std::int64_t median_total = 0;
};

/// Lower order statistic at index floor((n-1) p) of an unsorted sample.
double lower_quantile(std::vector<double> v, double p);

/// Best distance a trace achieved with at most `budget` flagged queries.
/// Before its first event the trace's first recorded distance is used;
/// a trace without events yields +inf.
double best_within(const AttackTrace& trace, std::int64_t budget);

/// Throws ParameterError on an empty trace list or unsorted budgets.
std::vector<CurvePoint> median_curve(const std::vector<AttackTrace>& traces,
                                     const std::vector<std::int64_t>& budgets);

struct ModerationPolicy {
  std::int64_t violations_per_account = 7;
  std::optional<std::int64_t> benign_limit_per_account;

  void validate() const;
};

std::int64_t accounts_needed(std::int64_t flagged, const ModerationPolicy& policy);
/// Also honors the benign-query limit when the policy sets one.
std::int64_t accounts_needed(std::int64_t total, std::int64_t flagged, const ModerationPolicy& policy);

struct FrontierEntry {
  std::string attack;
  std::optional<double> cost;  // nullopt: never reaches the target
  std::int64_t budget = 0;     // flagged budget where the target is first met
  std::int64_t total = 0;
};

/// Per attack, the smallest curve point whose median meets the target,
/// priced with the model; sorted by cost, unattained last.
std::vector<FrontierEntry> cost_frontier(const std::map<std::string, std::vector<CurvePoint>>& curves,
                                         const CostModel& m, double target_distance);

void write_curve_csv(std::ostream& os, const std::map<std::string, std::vector<CurvePoint>>& curves);

struct CostRow {
  std::string attack;
  CostModel model;
  std::optional<double> cost_at_target;
};
void write_cost_csv(std::ostream& os, const std::vector<CostRow>& rows);

/// Budgets 1, then roughly `per_decade` log-spaced values per decade up to
/// `max_budget` (always included).
std::vector<std::int64_t> log_budgets(std::int64_t max_budget, int per_decade = 10);

}  // namespace stealth
