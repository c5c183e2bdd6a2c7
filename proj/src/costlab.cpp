#include "stealth/costlab.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "stealth/errors.hpp"

namespace stealth {

void CostModel::validate() const {
  if (!(c0 >= 0.0) || !(c_flagged >= 0.0)) throw ParameterError("query costs must be non-negative");
}

double cost_of(std::int64_t total, std::int64_t flagged, const CostModel& m) {
  return static_cast<double>(total) * m.c0 + static_cast<double>(flagged) * m.c_flagged;
}

double cost_of(const QueryLedger& ledger, const CostModel& m) {
  return cost_of(ledger.total, ledger.flagged, m);
}

double lower_quantile(std::vector<double> v, double p) {
  if (v.empty()) throw ParameterError("quantile of an empty sample");
  const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(v.size() - 1) * p));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

namespace {

// Index of the last event with f <= budget, or -1.
std::ptrdiff_t last_within(const AttackTrace& tr, std::int64_t budget) {
  const auto it = std::upper_bound(tr.events.begin(), tr.events.end(), budget,
                                   [](std::int64_t b, const TraceEvent& e) { return b < e.f; });
  return (it - tr.events.begin()) - 1;
}

}  // namespace

double best_within(const AttackTrace& tr, std::int64_t budget) {
  if (tr.events.empty()) return std::numeric_limits<double>::infinity();
  const auto i = last_within(tr, budget);
  return i < 0 ? tr.events.front().d : tr.events[static_cast<std::size_t>(i)].d;
}

std::vector<CurvePoint> median_curve(const std::vector<AttackTrace>& traces,
                                     const std::vector<std::int64_t>& budgets) {
  if (traces.empty()) throw ParameterError("median curve needs at least one trace");
  if (!std::is_sorted(budgets.begin(), budgets.end())) {
    throw ParameterError("median curve budgets must be sorted ascending");
  }
  std::vector<CurvePoint> out;
  out.reserve(budgets.size());
  for (std::int64_t b : budgets) {
    std::vector<double> d, t;
    for (const auto& tr : traces) {
      d.push_back(best_within(tr, b));
      const auto i = last_within(tr, b);
      t.push_back(i < 0 ? 0.0 : static_cast<double>(tr.events[static_cast<std::size_t>(i)].t));
    }
    out.push_back({b, lower_quantile(d, 0.5), lower_quantile(d, 0.25), lower_quantile(d, 0.75),
                   static_cast<std::int64_t>(lower_quantile(t, 0.5))});
  }
  return out;
}

void ModerationPolicy::validate() const {
  if (violations_per_account < 1) throw ParameterError("violations_per_account must be >= 1");
  if (benign_limit_per_account && *benign_limit_per_account < 1) {
    throw ParameterError("benign_limit_per_account must be >= 1");
  }
}

std::int64_t accounts_needed(std::int64_t flagged, const ModerationPolicy& policy) {
  policy.validate();
  if (flagged <= 0) return 0;
  return (flagged + policy.violations_per_account - 1) / policy.violations_per_account;
}

std::int64_t accounts_needed(std::int64_t total, std::int64_t flagged, const ModerationPolicy& policy) {
  std::int64_t n = accounts_needed(flagged, policy);
  if (policy.benign_limit_per_account) {
    const std::int64_t benign = std::max<std::int64_t>(0, total - flagged);
    const std::int64_t lim = *policy.benign_limit_per_account;
    n = std::max(n, (benign + lim - 1) / lim);
  }
  return n;
}

std::vector<FrontierEntry> cost_frontier(const std::map<std::string, std::vector<CurvePoint>>& curves,
                                         const CostModel& m, double target_distance) {
  m.validate();
  std::vector<FrontierEntry> out;
  for (const auto& [attack, curve] : curves) {
    FrontierEntry e{attack, std::nullopt, 0, 0};
    for (const auto& p : curve) {
      if (p.median <= target_distance) {
        const double c = cost_of(p.median_total, p.budget, m);
        if (!e.cost || c < *e.cost) {
          e.cost = c;
          e.budget = p.budget;
          e.total = p.median_total;
        }
      }
    }
    out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(), [](const FrontierEntry& a, const FrontierEntry& b) {
    if (a.cost.has_value() != b.cost.has_value()) return a.cost.has_value();
    return a.cost && *a.cost < *b.cost;
  });
  return out;
}

void write_curve_csv(std::ostream& os, const std::map<std::string, std::vector<CurvePoint>>& curves) {
  os << "attack,budget,median,q25,q75\n" << std::setprecision(12);
  for (const auto& [attack, curve] : curves) {
    for (const auto& p : curve) {
      os << attack << ',' << p.budget << ',' << p.median << ',' << p.q25 << ',' << p.q75 << '\n';
    }
  }
}

void write_cost_csv(std::ostream& os, const std::vector<CostRow>& rows) {
  os << "attack,c0,c_flagged,cost_at_target\n" << std::setprecision(12);
  for (const auto& r : rows) {
    os << r.attack << ',' << r.model.c0 << ',' << r.model.c_flagged << ',';
    if (r.cost_at_target) os << *r.cost_at_target; else os << "unattained";
    os << '\n';
  }
}

std::vector<std::int64_t> log_budgets(std::int64_t max_budget, int per_decade) {
  if (max_budget < 1 || per_decade < 1) throw ParameterError("log_budgets needs positive arguments");
  std::vector<std::int64_t> out;
  for (int i = 0;; ++i) {
    const auto b = static_cast<std::int64_t>(std::llround(std::pow(10.0, static_cast<double>(i) / per_decade)));
    if (b >= max_budget) break;
    if (out.empty() || b > out.back()) out.push_back(b);
  }
  out.push_back(max_budget);
  return out;
}

}  // namespace stealth
