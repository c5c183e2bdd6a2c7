#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "stealth/attacks.hpp"
#include "stealth/errors.hpp"

namespace stealth {

void AttackConfig::validate() const {
  if (flagged_budget < 1) throw ParameterError("flagged_budget must be >= 1");
  if (total_budget && *total_budget < 1) throw ParameterError("total_budget must be >= 1");
  if (grad_samples && *grad_samples < 1) throw ParameterError("grad_samples must be >= 1");
  if (signopt_shrink && !(*signopt_shrink >= 1.0)) throw ParameterError("signopt_shrink must be >= 1");
  if (!(safe_start > 0.0 && safe_start < 1.0)) throw ParameterError("safe_start must lie in (0,1)");
  if (!(rays_early_stop > 0.0 && rays_early_stop < 1.0)) {
    throw ParameterError("rays_early_stop must lie in (0,1)");
  }
  if (n_init < 1) throw ParameterError("n_init must be >= 1");
  if (max_iterations < 1) throw ParameterError("max_iterations must be >= 1");
  if (target_distance && !(*target_distance >= 0.0)) {
    throw ParameterError("target_distance must be non-negative");
  }
  if (strategy) strategy->validate();
}

std::string AttackConfig::canonical() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "norm=" << to_string(norm) << ";flagged_budget=" << flagged_budget
     << ";total_budget=" << (total_budget ? std::to_string(*total_budget) : "none")
     << ";strategy=" << (strategy ? strategy->describe() : "default")
     << ";grad_samples=" << (grad_samples ? std::to_string(*grad_samples) : "default")
     << ";signopt_shrink=";
  if (signopt_shrink) os << *signopt_shrink; else os << "default";
  os << ";safe_start=" << safe_start << ";rays_early_stop=" << rays_early_stop
     << ";early_stop=" << early_stop << ";n_init=" << n_init << ";seed=" << rng_seed
     << ";target=";
  if (target_distance) os << *target_distance; else os << "none";
  os << ";max_iterations=" << max_iterations;
  return os.str();
}

namespace detail {
Verdict GuardedOracle::decide(std::span<const double> p) {
  run_.guard();
  return inner_.decide(p);
}
}  // namespace detail

AttackRun::AttackRun(DecisionOracle& oracle, Point x, const AttackConfig& cfg, std::string attack)
    : guarded_(oracle, *this), oracle_(guarded_), x_(std::move(x)), cfg_(cfg), rng_(cfg.rng_seed) {
  cfg_.validate();
  if (x_.size() != oracle_.dimension()) {
    throw DimensionError("sample dimension does not match the oracle");
  }
  trace_.header.attack = std::move(attack);
  trace_.header.config_digest = fnv1a64_hex(cfg_.canonical());
  trace_.header.oracle = oracle_.descriptor();
  trace_.header.seed = cfg_.rng_seed;
  oracle_.set_observer([this](std::span<const double>, Verdict v, Phase) {
    const bool flagged = v == Verdict::Flagged;
    if (in_get_dist_) {
      ++tally_.get_dist_queries;
      tally_.get_dist_flagged += flagged;
    } else {
      ++tally_.check_adv_queries;
      tally_.check_adv_flagged += flagged;
    }
  });
}

void AttackRun::guard() const {
  const QueryLedger l = oracle_.snapshot();
  if (l.flagged >= cfg_.flagged_budget) throw StopAttack{StopReason::FlaggedBudget};
  if (cfg_.total_budget && l.total >= *cfg_.total_budget) throw StopAttack{StopReason::TotalBudget};
  if (cfg_.target_distance && trace_.best() && *trace_.best() <= *cfg_.target_distance) {
    throw StopAttack{StopReason::TargetDistance};
  }
}

Verdict AttackRun::check_adv(std::span<const double> theta, double dist, Phase phase) {
  const Verdict v = stealth::check_adv(oracle_, x_, theta, dist, phase, cfg_.norm);
  if (!in_get_dist_) ++tally_.check_adv_calls;
  return v;
}

Verdict AttackRun::check_point(std::span<const double> p, Phase phase, Point* admitted) {
  Point q = oracle_.admissible(p);
  const Verdict v = oracle_.query(q, phase);
  if (!in_get_dist_) ++tally_.check_adv_calls;
  if (admitted) *admitted = std::move(q);
  return v;
}

AttackRun::GetDistScope::GetDistScope(AttackRun& run) : run_(run), prev_(run.in_get_dist_) {
  if (!prev_) ++run_.tally_.get_dist_calls;
  run_.in_get_dist_ = true;
}

AttackRun::GetDistScope::~GetDistScope() { run_.in_get_dist_ = prev_; }

SearchOutcome AttackRun::get_dist(const PathFn& path, double lo, double hi,
                                  const SearchStrategy& s, Phase phase,
                                  std::optional<double> reference, bool lo_known_flagged) {
  GetDistScope scope(*this);
  return search_path(oracle_, path, lo, hi, s, phase, reference, lo_known_flagged);
}

void AttackRun::offer(const Point& safe_point) {
  const double d = distance(safe_point, x_, cfg_.norm);
  const QueryLedger l = oracle_.snapshot();
  if (trace_.record(l.flagged, l.total, d)) best_point_ = safe_point;
}

void AttackRun::next_iteration() {
  if (iterations_ >= cfg_.max_iterations) throw StopAttack{StopReason::Converged};
  ++iterations_;
}

AttackTrace AttackRun::execute(const std::function<void()>& body) {
  try {
    body();
    return finish(StopReason::Converged);
  } catch (const StopAttack& s) {
    return finish(s.reason);
  } catch (const InitializationError& e) {
    return finish(StopReason::Failed, e.what());
  } catch (const DegenerateDirectionError& e) {
    return finish(StopReason::Converged, e.what());
  }
}

AttackTrace AttackRun::finish(StopReason reason, std::string error) {
  AttackTrace out = trace_;
  out.summary.stop_reason = reason;
  out.summary.ledger = oracle_.snapshot();
  out.summary.tally = tally_;
  out.summary.best_distance = trace_.best();
  out.summary.x_adv = best_point_;
  out.summary.iterations = iterations_;
  out.summary.error = std::move(error);
  return out;
}

InitResult init_direction(AttackRun& run, int n_init, const SearchStrategy& strategy) {
  const Point& x = run.x();
  const double reach = std::sqrt(static_cast<double>(run.dim()));
  std::optional<InitResult> best;
  for (int i = 0; i < n_init; ++i) {
    const Vec u = unit_gaussian(run.dim(), run.rng());
    Point far;
    if (run.check_point(axpy(x, reach, u), Phase::Init, &far) != Verdict::Safe) continue;
    const Vec dir = sub(far, x);
    const double len = norm(dir, NormKind::L2);
    if (!(len > 0.0)) continue;
    const Vec theta = scale(dir, 1.0 / len);
    const PathFn path = [&x, theta](double t) { return axpy(x, t, theta); };
    AttackRun::GetDistScope scope(run);
    double hi = len;
    if (best && len > best->dist) {
      // Only worth a search when it can beat the current best.
      if (run.check_point(path(best->dist), Phase::Init) != Verdict::Safe) continue;
      hi = best->dist;
    }
    const SearchOutcome out = run.get_dist(path, 0.0, hi, strategy, Phase::Init);
    if (!best || out.distance < best->dist) {
      best = InitResult{theta, out.distance, out.point};
      run.offer(out.point);
    }
  }
  if (!best) throw InitializationError("no safe direction among the initial samples");
  return *best;
}

Vec estimate_grad_distance(std::span<const double> theta, double g0, int n, double beta,
                           std::mt19937_64& rng,
                           const std::function<double(std::span<const double>)>& g) {
  Vec grad(theta.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const Vec u = unit_gaussian(theta.size(), rng);
    const Vec probe = normalized(axpy(theta, beta, u));
    const double gi = g(probe);
    grad = axpy(grad, (gi - g0) / beta, u);
  }
  return scale(grad, 1.0 / n);
}

Vec estimate_grad_sign(std::span<const double> theta, int n, double beta, std::mt19937_64& rng,
                       const std::function<bool(std::span<const double>)>& safe_along) {
  Vec grad(theta.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const Vec u = unit_gaussian(theta.size(), rng);
    const Vec probe = normalized(axpy(theta, beta, u));
    grad = axpy(grad, safe_along(probe) ? -1.0 : 1.0, u);
  }
  return scale(grad, 1.0 / n);
}

const std::vector<AttackInfo>& attack_registry() {
  static const std::vector<AttackInfo> reg = {
      {"boundary", attack_boundary, {NormKind::L2}},
      {"rays", attack_rays, {NormKind::Linf}},
      {"stealthy-rays", attack_stealthy_rays, {NormKind::Linf}},
      {"opt", attack_opt, {NormKind::L2}},
      {"stealthy-opt", attack_stealthy_opt, {NormKind::L2}},
      {"signopt", attack_signopt, {NormKind::L2}},
      {"stealthy-signopt", attack_stealthy_signopt, {NormKind::L2}},
      {"hsja", attack_hsja, {NormKind::L2, NormKind::Linf}},
      {"stealthy-hsja", attack_stealthy_hsja, {NormKind::L2, NormKind::Linf}},
  };
  return reg;
}

std::vector<std::string> attack_names() {
  std::vector<std::string> names;
  for (const auto& a : attack_registry()) names.push_back(a.name);
  return names;
}

const AttackInfo& find_attack(const std::string& name) {
  for (const auto& a : attack_registry()) {
    if (a.name == name) return a;
  }
  std::string valid;
  for (const auto& n : attack_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ParameterError("unknown attack '" + name + "'; valid names: " + valid);
}

}  // namespace stealth
