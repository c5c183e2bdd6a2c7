// Opt and Sign-Opt: search over L2 ray directions theta minimizing the
// boundary distance g(theta), with zeroth-order gradient estimates.

#include <cmath>
#include <limits>

#include "stealth/attacks.hpp"
#include "stealth/errors.hpp"

namespace stealth {

namespace {

constexpr double kAlpha0 = 0.2;
constexpr double kBeta0 = 0.01;
constexpr int kMaxStepSearches = 15;

enum class Estimator { Distance, Sign };

struct RayDistance {
  double distance = std::numeric_limits<double>::infinity();
  bool real = false;  // backed by a concrete safe point
};

class OptFamily {
 public:
  OptFamily(AttackRun& run, bool stealthy)
      : run_(run),
        stealthy_(stealthy),
        window_(run.cfg().strategy.value_or(SearchStrategy::line(1e-4))),
        gamma_(run.cfg().safe_start),
        reach_(std::sqrt(static_cast<double>(run.dim()))) {}

  PathFn ray(const Vec& theta) const {
    const Point& x = run_.x();
    return [&x, theta](double t) { return axpy(x, t, theta); };
  }

  InitResult init() {
    const SearchStrategy s = stealthy_ ? window_ : SearchStrategy::binary(1e-5, true);
    return init_direction(run_, run_.cfg().n_init, s);
  }

  // Boundary distance along theta near `initial`: bracket by factors of
  // 1.01 / 0.99, then bisect to `tol`.
  RayDistance local_search(const Vec& theta, double initial, double tol, Phase phase) {
    AttackRun::GetDistScope scope(run_);
    const PathFn path = ray(theta);
    double lo = 0.0, hi = initial;
    if (run_.check_point(path(initial), phase) != Verdict::Safe) {
      lo = initial;
      hi = initial * 1.01;
      while (run_.check_point(path(hi), phase) != Verdict::Safe) {
        lo = hi;
        hi *= 1.01;
        if (hi > reach_) return {};
      }
    } else {
      for (double t = initial * 0.99;; t *= 0.99) {
        if (t < 1e-12) break;
        if (run_.check_point(path(t), phase) != Verdict::Safe) {
          lo = t;
          break;
        }
        hi = t;
      }
    }
    const auto out = run_.get_dist(path, lo, hi, SearchStrategy::binary(tol, true), phase);
    run_.offer(out.point);
    return {out.distance, true};
  }

  // Safe-start window search for gradient estimation.
  RayDistance gradient_window(const Vec& theta, double dist) {
    AttackRun::GetDistScope scope(run_);
    const PathFn path = ray(theta);
    const double hi = (1.0 + gamma_) * dist;
    if (run_.check_point(path(hi), Phase::UpdateDir) != Verdict::Safe) {
      return {(1.0 + 2.0 * gamma_) * dist, false};
    }
    const auto out = run_.get_dist(path, (1.0 - gamma_) * dist, hi, window_, Phase::UpdateDir,
                                   std::nullopt, false);
    run_.offer(out.point);
    return {out.distance, true};
  }

  // Step-size search: only distances below `dist` matter.
  RayDistance step_window(const Vec& theta, double dist) {
    AttackRun::GetDistScope scope(run_);
    const PathFn path = ray(theta);
    if (run_.check_point(path(dist), Phase::StepSize) != Verdict::Safe) return {};
    const auto out = run_.get_dist(path, (1.0 - gamma_) * dist, dist, window_, Phase::StepSize,
                                   std::nullopt, false);
    run_.offer(out.point);
    return {out.distance, true};
  }

  RayDistance step_distance(const Vec& theta, double dist, double beta) {
    return stealthy_ ? step_window(theta, dist)
                     : local_search(theta, dist, beta / 500.0, Phase::StepSize);
  }

  void run(Estimator estimator, int n) {
    InitResult start = init();
    Vec theta = start.theta;
    double g2 = start.dist;
    double alpha = kAlpha0, beta = kBeta0;
    for (;;) {
      run_.next_iteration();
      double min_g1 = std::numeric_limits<double>::infinity();
      Vec min_ttt;
      Vec grad;
      if (estimator == Estimator::Distance) {
        grad = estimate_grad_distance(theta, g2, n, beta, run_.rng(), [&](std::span<const double> t) {
          const Vec ttt(t.begin(), t.end());
          const RayDistance r = stealthy_ ? gradient_window(ttt, g2)
                                          : local_search(ttt, g2, beta / 500.0, Phase::UpdateDir);
          if (!std::isfinite(r.distance)) return g2;
          if (r.real && r.distance < min_g1) {
            min_g1 = r.distance;
            min_ttt = ttt;
          }
          return r.distance;
        });
      } else {
        grad = estimate_grad_sign(theta, n, beta, run_.rng(), [&](std::span<const double> t) {
          return run_.check_adv(t, g2, Phase::UpdateDir) == Verdict::Safe;
        });
      }

      Vec min_theta = theta;
      double min_g2 = g2;
      const StepSearchResult expand = geometric_expand_search(
          run_.oracle(),
          [&](double a) -> std::optional<double> {
            const Vec nt = normalized(axpy(theta, -a, grad));
            const RayDistance r = step_distance(nt, min_g2, beta);
            if (!std::isfinite(r.distance)) return std::nullopt;
            if (r.distance < min_g2) {
              min_g2 = r.distance;
              min_theta = nt;
            }
            return r.distance;
          },
          g2, alpha, kMaxStepSearches);
      alpha *= std::exp2(expand.evaluations);

      if (!(min_g2 < g2)) {
        for (int i = 0; i < kMaxStepSearches; ++i) {
          alpha *= 0.25;
          const Vec nt = normalized(axpy(theta, -alpha, grad));
          const RayDistance r = step_distance(nt, g2, beta);
          if (r.distance < g2) {
            min_theta = nt;
            min_g2 = r.distance;
            break;
          }
        }
      }

      if (min_g2 <= min_g1) {
        theta = min_theta;
        g2 = min_g2;
      } else {
        theta = min_ttt;
        g2 = min_g1;
      }

      if (alpha < 1e-4) {
        alpha = 1.0;
        beta *= 0.1;
        if (beta < 1e-8) return;
      }
    }
  }

 private:
  AttackRun& run_;
  bool stealthy_;
  SearchStrategy window_;
  double gamma_;
  double reach_;
};

void require_l2(const AttackConfig& cfg, const char* name) {
  if (cfg.norm != NormKind::L2) throw ParameterError(std::string(name) + " supports L2 only");
}

}  // namespace

AttackTrace attack_opt(DecisionOracle& o, const Point& x, const AttackConfig& cfg) {
  require_l2(cfg, "Opt");
  AttackRun run(o, x, cfg, "opt");
  return run.execute([&] { OptFamily(run, false).run(Estimator::Distance, cfg.grad_samples.value_or(10)); });
}

AttackTrace attack_stealthy_opt(DecisionOracle& o, const Point& x, const AttackConfig& cfg) {
  require_l2(cfg, "Opt");
  AttackRun run(o, x, cfg, "stealthy-opt");
  return run.execute([&] { OptFamily(run, true).run(Estimator::Distance, cfg.grad_samples.value_or(10)); });
}

AttackTrace attack_signopt(DecisionOracle& o, const Point& x, const AttackConfig& cfg) {
  require_l2(cfg, "Sign-Opt");
  AttackRun run(o, x, cfg, "signopt");
  return run.execute([&] { OptFamily(run, false).run(Estimator::Sign, cfg.grad_samples.value_or(200)); });
}

AttackTrace attack_stealthy_signopt(DecisionOracle& o, const Point& x, const AttackConfig& cfg) {
  require_l2(cfg, "Sign-Opt");
  AttackRun run(o, x, cfg, "stealthy-signopt");
  const int n = cfg.grad_samples.value_or(
      static_cast<int>(std::lround(200.0 / cfg.signopt_shrink.value_or(2.5))));
  return run.execute([&] { OptFamily(run, true).run(Estimator::Sign, std::max(1, n)); });
}

}  // namespace stealth
