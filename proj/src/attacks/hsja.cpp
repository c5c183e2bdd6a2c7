// HopSkipJump: walk along the boundary using sign-based gradient estimates
// at the boundary point, with geometric step sizes and a projection search.

#include <algorithm>
#include <cmath>

#include "stealth/attacks.hpp"
#include "stealth/errors.hpp"

namespace stealth {

namespace {

constexpr double kGamma = 10000.0;
constexpr double kReferenceDim = 3.0 * 224 * 224;
constexpr int kInitEvals = 100;
constexpr int kMaxEvals = 10000;
constexpr int kStealthyGradShrink = 20;
constexpr double kOptBeta = 0.01;

class Hsja {
 public:
  Hsja(AttackRun& run, bool stealthy) : run_(run), stealthy_(stealthy), norm_(run.cfg().norm) {
    const double d = static_cast<double>(run.dim());
    // gamma is tuned for image-sized inputs; keep the per-dimension
    // threshold it implies there.
    const double gamma = kGamma * d / kReferenceDim;
    theta_ = norm_ == NormKind::L2 ? gamma / (d * std::sqrt(d)) : gamma / (d * d);
    window_ = run.cfg().strategy.value_or(SearchStrategy::line(1e-4));
    proj_line_ = run.cfg().strategy.value_or(SearchStrategy::line(1e-4));
  }

  void run() {
    const Point& x = run_.x();
    project(initialize());
    for (int j = 1;; ++j) {
      run_.next_iteration();
      const double delta = j == 1 ? 0.1
                           : norm_ == NormKind::L2
                               ? std::sqrt(static_cast<double>(run_.dim())) * theta_ * dist_post_
                               : static_cast<double>(run_.dim()) * theta_ * dist_post_;
      const int evals = std::min(kMaxEvals, static_cast<int>(run_.cfg().grad_samples.value_or(kInitEvals) *
                                                             std::sqrt(static_cast<double>(j))));
      const Vec grad = stealthy_ ? distance_gradient(evals) : sign_gradient(evals, delta);
      const Vec update = norm_ == NormKind::L2 ? grad : sign_vector(grad);
      const double eps0 = distance(x_b_, x, norm_) / std::sqrt(static_cast<double>(j));
      if (stealthy_) {
        stealthy_step(update, eps0);
      } else {
        project(backtrack_step(update, eps0));
      }
    }
  }

 private:
  Point initialize() {
    const Point& x = run_.x();
    Point noise;
    bool found = false;
    for (int i = 0; i < run_.cfg().n_init && !found; ++i) {
      found = run_.check_point(uniform_vector(run_.dim(), 0.0, 1.0, run_.rng()), Phase::Init,
                               &noise) == Verdict::Safe;
    }
    if (!found) throw InitializationError("no safe uniform-noise starting point found");
    const Vec dir = sub(noise, x);
    const PathFn path = [&x, dir](double t) { return axpy(x, t, dir); };
    const SearchStrategy s = stealthy_ ? SearchStrategy::line(1e-3) : SearchStrategy::binary(1e-3);
    const SearchOutcome out = run_.get_dist(path, 0.0, 1.0, s, Phase::Init);
    run_.offer(out.point);
    return out.point;
  }

  // Moves `perturbed` (safe) back toward the original until the boundary.
  void project(const Point& perturbed) {
    const Point& x = run_.x();
    dist_post_ = distance(perturbed, x, norm_);
    SearchOutcome out;
    if (norm_ == NormKind::L2) {
      const Vec dir = sub(perturbed, x);
      const PathFn path = [&x, dir](double a) { return axpy(x, a, dir); };
      const double eta = std::min(theta_, 0.5);
      const SearchStrategy s =
          stealthy_ ? run_.cfg().strategy.value_or(SearchStrategy::line(eta))
                    : SearchStrategy::binary(eta);
      out = run_.get_dist(path, 0.0, 1.0, s, Phase::ProjBoundary);
    } else {
      const PathFn path = [&x, perturbed](double a) {
        Point p(perturbed);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::clamp(p[i], x[i] - a, x[i] + a);
        return p;
      };
      const double tol = std::min(dist_post_ * theta_, theta_);
      const SearchStrategy s =
          stealthy_ ? run_.cfg().strategy.value_or(SearchStrategy::line(tol, true))
                    : SearchStrategy::binary(tol, true);
      out = run_.get_dist(path, 0.0, dist_post_, s, Phase::ProjBoundary);
    }
    x_b_ = out.point;
    run_.offer(x_b_);
  }

  Vec sign_gradient(int evals, double delta) {
    const std::size_t d = run_.dim();
    std::vector<Vec> rvs;
    std::vector<double> fval;
    rvs.reserve(evals);
    for (int i = 0; i < evals; ++i) {
      Vec rv = norm_ == NormKind::L2 ? gaussian_vector(d, run_.rng())
                                     : uniform_vector(d, -1.0, 1.0, run_.rng());
      rv = normalized(rv);
      Point p;
      const bool safe = run_.check_point(axpy(x_b_, delta, rv), Phase::UpdateDir, &p) == Verdict::Safe;
      rvs.push_back(scale(sub(p, x_b_), 1.0 / delta));
      fval.push_back(safe ? 1.0 : -1.0);
    }
    double mean = 0.0;
    for (double f : fval) mean += f;
    mean /= evals;
    Vec grad(d, 0.0);
    for (int i = 0; i < evals; ++i) {
      const double w = mean == 1.0 ? 1.0 : mean == -1.0 ? -1.0 : fval[i] - mean;
      grad = axpy(grad, w / evals, rvs[i]);
    }
    if (!(norm(grad, NormKind::L2) > 0.0)) throw DegenerateDirectionError("zero gradient estimate");
    return normalized(grad);
  }

  // Distance-based estimate of the ray-distance gradient at the current
  // direction; the step goes against it.
  Vec distance_gradient(int evals) {
    const Point& x = run_.x();
    const Vec to_b = sub(x_b_, x);
    const double g0 = norm(to_b, NormKind::L2);
    const Vec theta = scale(to_b, 1.0 / g0);
    const double gamma = run_.cfg().safe_start;
    const int n = std::max(1, evals / kStealthyGradShrink);
    const Vec grad = estimate_grad_distance(theta, g0, n, kOptBeta, run_.rng(),
                                            [&](std::span<const double> t) {
      AttackRun::GetDistScope scope(run_);
      const Vec dir(t.begin(), t.end());
      const PathFn path = [&x, dir](double s) { return axpy(x, s, dir); };
      const double hi = (1.0 + gamma) * g0;
      if (run_.check_point(path(hi), Phase::UpdateDir) != Verdict::Safe) {
        return (1.0 + 2.0 * gamma) * g0;
      }
      const SearchOutcome out = run_.get_dist(path, (1.0 - gamma) * g0, hi, window_,
                                              Phase::UpdateDir, std::nullopt, false);
      run_.offer(out.point);
      return out.distance;
    });
    if (!(norm(grad, NormKind::L2) > 0.0)) throw DegenerateDirectionError("zero gradient estimate");
    return scale(normalized(grad), -1.0);
  }

  Point backtrack_step(const Vec& update, double eps0) {
    const StepSearchResult r =
        geometric_backtrack_search(run_.oracle(), x_b_, update, eps0, Phase::StepSize);
    run_.note_check_adv_calls(r.evaluations);
    return r.point;
  }

  // Projection path through p: parameter a is the distance from x in the
  // attack norm (a ray for L2, a shrinking box for Linf).
  PathFn projection_path(const Point& p) const {
    const Point& x = run_.x();
    if (norm_ == NormKind::L2) {
      const Vec u = normalized(sub(p, x));
      return [&x, u](double a) { return axpy(x, a, u); };
    }
    return [&x, p](double a) {
      Point q(p);
      for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::clamp(q[i], x[i] - a, x[i] + a);
      return q;
    };
  }

  // Halves the step until the stepped point, pulled back to the current
  // distance, is safe; then line-searches the new boundary below it. Each
  // rejected step costs one flagged query and the search at most one.
  void stealthy_step(const Vec& update, double eps0) {
    const double g = distance(x_b_, run_.x(), norm_);
    for (double eps = eps0; eps >= 1e-12 * eps0; eps *= 0.5) {
      const Point p = run_.oracle().admissible(axpy(x_b_, eps, update));
      if (!(distance(p, run_.x(), norm_) > 0.0)) continue;
      const PathFn path = projection_path(p);
      if (run_.check_point(path(g), Phase::StepSize) != Verdict::Safe) continue;
      dist_post_ = distance(p, run_.x(), norm_);
      const SearchOutcome out = run_.get_dist(path, 0.0, g, proj_line_, Phase::ProjBoundary);
      x_b_ = out.point;
      run_.offer(x_b_);
      return;
    }
    throw DegenerateDirectionError("no step along the estimated direction stays safe");
  }

  AttackRun& run_;
  bool stealthy_;
  NormKind norm_;
  double theta_ = 0.0;
  SearchStrategy window_;
  SearchStrategy proj_line_;
  Point x_b_;
  double dist_post_ = 0.0;
};

AttackTrace run_hsja(DecisionOracle& o, const Point& x, const AttackConfig& cfg, bool stealthy) {
  AttackRun run(o, x, cfg, stealthy ? "stealthy-hsja" : "hsja");
  return run.execute([&] { Hsja(run, stealthy).run(); });
}

}  // namespace

AttackTrace attack_hsja(DecisionOracle& o, const Point& x, const AttackConfig& cfg) {
  return run_hsja(o, x, cfg, false);
}

AttackTrace attack_stealthy_hsja(DecisionOracle& o, const Point& x, const AttackConfig& cfg) {
  return run_hsja(o, x, cfg, true);
}

}  // namespace stealth
