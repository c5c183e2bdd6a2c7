#pragma once

// The five decision-based attacks and their stealthy variants. Every attack
// talks to the oracle only through check_adv / get_dist on an AttackRun,
// which charges budgets, tallies primitives and records the trace.

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stealth/search.hpp"
#include "stealth/trace.hpp"

namespace stealth {

struct AttackConfig {
  NormKind norm = NormKind::L2;
  std::int64_t flagged_budget = 1000;
  std::optional<std::int64_t> total_budget;
  // Search used by the attack's getDist calls. When unset each attack uses
  // its own default (binary for base attacks, line search for stealthy).
  std::optional<SearchStrategy> strategy;
  std::optional<int> grad_samples;        // n; per-attack default when unset
  std::optional<double> signopt_shrink;   // stealthy Sign-Opt k (default 2.5)
  double safe_start = 0.01;               // gamma_ss
  double rays_early_stop = 0.9;           // gamma_es
  bool early_stop = true;                 // stealthy RayS only
  int n_init = 100;
  std::uint64_t rng_seed = 0;
  std::optional<double> target_distance;
  std::int64_t max_iterations = 1000000;

  void validate() const;
  std::string canonical() const;  // stable text form, digested into traces
};

// Thrown by AttackRun before a primitive call once a stop condition holds.
struct StopAttack {
  StopReason reason;
};

class AttackRun;

namespace detail {
// Checks the run's stop conditions before every oracle query.
class GuardedOracle final : public DecisionOracle {
 public:
  GuardedOracle(DecisionOracle& inner, AttackRun& run) : inner_(inner), run_(run) {}
  Verdict decide(std::span<const double> p) override;
  OracleDescriptor descriptor() const override { return inner_.descriptor(); }

 private:
  DecisionOracle& inner_;
  AttackRun& run_;
};
}  // namespace detail

class AttackRun {
 public:
  AttackRun(DecisionOracle& oracle, Point x, const AttackConfig& cfg, std::string attack);
  AttackRun(const AttackRun&) = delete;
  AttackRun& operator=(const AttackRun&) = delete;

  const Point& x() const { return x_; }
  const AttackConfig& cfg() const { return cfg_; }
  std::mt19937_64& rng() { return rng_; }
  InstrumentedOracle& oracle() { return oracle_; }
  std::size_t dim() const { return x_.size(); }
  QueryLedger ledger() const { return oracle_.snapshot(); }

  /// Throws StopAttack when a budget or the target distance is reached.
  /// Runs before every query, so a run never exceeds its budgets.
  void guard() const;

  Verdict check_adv(std::span<const double> theta, double dist, Phase phase);
  /// One query at an explicit point (clipped/quantized first). Counted as a
  /// checkAdv call unless issued inside a getDist scope.
  Verdict check_point(std::span<const double> p, Phase phase, Point* admitted = nullptr);

  /// A getDist call: search along path(t) for t in [lo, hi] where path(hi) is
  /// known safe.
  SearchOutcome get_dist(const PathFn& path, double lo, double hi, const SearchStrategy& s,
                         Phase phase, std::optional<double> reference = std::nullopt,
                         bool lo_known_flagged = true);

  /// For queries issued directly through oracle() outside any getDist
  /// scope: records how many checkAdv calls they were.
  void note_check_adv_calls(std::int64_t n) { tally_.check_adv_calls += n; }

  // Groups several raw probes into one getDist call for the tallies.
  class GetDistScope {
   public:
    explicit GetDistScope(AttackRun& run);
    ~GetDistScope();
    GetDistScope(const GetDistScope&) = delete;
    GetDistScope& operator=(const GetDistScope&) = delete;

   private:
    AttackRun& run_;
    bool prev_;
  };

  /// Offers a point known to be safe; records an event when it improves
  /// the best distance.
  void offer(const Point& safe_point);
  std::optional<double> best() const { return trace_.best(); }
  const Point& best_point() const { return best_point_; }

  std::int64_t iteration() const { return iterations_; }
  void next_iteration();

  /// Runs the attack body and converts stop conditions into the summary.
  AttackTrace execute(const std::function<void()>& body);

 private:
  AttackTrace finish(StopReason reason, std::string error = {});

  detail::GuardedOracle guarded_;
  InstrumentedOracle oracle_;
  Point x_;
  const AttackConfig& cfg_;
  std::mt19937_64 rng_;
  AttackTrace trace_;
  Point best_point_;
  PrimitiveTally tally_;
  bool in_get_dist_ = false;
  std::int64_t iterations_ = 0;
};

using AttackFn = std::function<AttackTrace(DecisionOracle&, const Point&, const AttackConfig&)>;

struct InitResult {
  Vec theta;    // unit direction in cfg.norm
  double dist;  // boundary distance along theta
  Point point;  // safe point at dist
};

/// Samples up to n_init random directions (checkAdv at the farthest in-cube
/// distance), measures the boundary distance along each safe one with a
/// binary getDist, and keeps the shortest. Throws InitializationError when
/// none is safe.
InitResult init_direction(AttackRun& run, int n_init, const SearchStrategy& strategy);

AttackTrace attack_boundary(DecisionOracle& o, const Point& x, const AttackConfig& cfg);
AttackTrace attack_rays(DecisionOracle& o, const Point& x, const AttackConfig& cfg);
AttackTrace attack_stealthy_rays(DecisionOracle& o, const Point& x, const AttackConfig& cfg);
AttackTrace attack_opt(DecisionOracle& o, const Point& x, const AttackConfig& cfg);
AttackTrace attack_stealthy_opt(DecisionOracle& o, const Point& x, const AttackConfig& cfg);
AttackTrace attack_signopt(DecisionOracle& o, const Point& x, const AttackConfig& cfg);
AttackTrace attack_stealthy_signopt(DecisionOracle& o, const Point& x, const AttackConfig& cfg);
AttackTrace attack_hsja(DecisionOracle& o, const Point& x, const AttackConfig& cfg);
AttackTrace attack_stealthy_hsja(DecisionOracle& o, const Point& x, const AttackConfig& cfg);

struct AttackInfo {
  std::string name;
  AttackFn fn;
  std::vector<NormKind> norms;  // norms the attack supports
};

const std::vector<AttackInfo>& attack_registry();
/// Throws ParameterError listing valid names.
const AttackInfo& find_attack(const std::string& name);
std::vector<std::string> attack_names();

// Gradient estimators of the boundary distance g(theta), shared by the
// attacks and the estimator-quality tests. Both draw Gaussian unit u_i.
// Distance form: (1/n) sum (g(normalize(theta + beta u_i)) - g0) / beta * u_i.
Vec estimate_grad_distance(std::span<const double> theta, double g0, int n, double beta,
                           std::mt19937_64& rng,
                           const std::function<double(std::span<const double>)>& g);
// Sign form: (1/n) sum s_i u_i, where s_i = -1 when the probe along
// normalize(theta + beta u_i) at the current distance is safe, else +1.
Vec estimate_grad_sign(std::span<const double> theta, int n, double beta, std::mt19937_64& rng,
                       const std::function<bool(std::span<const double>)>& safe_along);

}  // namespace stealth
