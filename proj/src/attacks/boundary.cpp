// Boundary Attack: random walk along the boundary, greedily accepting
// candidates that stay safe while moving toward the original.

#include <cmath>

#include "stealth/attacks.hpp"
#include "stealth/errors.hpp"

namespace stealth {

namespace {

constexpr int kAdaptWindow = 30;
constexpr double kBlendSteps = 25;
constexpr double kMinSourceStep = 1e-7;

Point blended_start(AttackRun& run) {
  const Point& x = run.x();
  Point noise;
  bool found = false;
  for (int i = 0; i < run.cfg().n_init && !found; ++i) {
    found = run.check_point(uniform_vector(run.dim(), 0.0, 1.0, run.rng()), Phase::Init, &noise) ==
            Verdict::Safe;
  }
  if (!found) throw InitializationError("no safe uniform-noise starting point found");
  for (int j = 1; j < kBlendSteps; ++j) {
    Point q;
    if (run.check_point(axpy(x, j / kBlendSteps, sub(noise, x)), Phase::Init, &q) == Verdict::Safe) {
      return q;
    }
  }
  return noise;
}

}  // namespace

AttackTrace attack_boundary(DecisionOracle& o, const Point& x, const AttackConfig& cfg) {
  if (cfg.norm != NormKind::L2) throw ParameterError("boundary attack supports L2 only");
  AttackRun run(o, x, cfg, "boundary");
  return run.execute([&] {
    Point best = blended_start(run);
    run.offer(best);
    double spherical_step = 0.01, source_step = 0.01;
    int sph_trials = 0, sph_ok = 0, step_trials = 0, step_ok = 0;
    for (;;) {
      run.next_iteration();
      const Vec diff = sub(x, best);
      const double r = norm(diff, NormKind::L2);
      if (!(r > 0.0) || source_step < kMinSourceStep) return;
      const Vec to_x = scale(diff, 1.0 / r);

      Vec eta = gaussian_vector(run.dim(), run.rng());
      eta = axpy(eta, -dot(eta, to_x), to_x);
      const double eta_norm = norm(eta, NormKind::L2);
      if (!(eta_norm > 0.0)) continue;
      eta = scale(eta, spherical_step * r / eta_norm);
      Vec v = sub(add(best, eta), x);
      const Point sphere = axpy(x, r / norm(v, NormKind::L2), v);

      const Vec back = sub(x, sphere);
      const Point candidate = axpy(sphere, source_step * r / norm(back, NormKind::L2), back);

      ++sph_trials;
      if (run.check_point(sphere, Phase::ProjBoundary) == Verdict::Safe) {
        ++sph_ok;
        ++step_trials;
        Point adm;
        if (run.check_point(candidate, Phase::StepSize, &adm) == Verdict::Safe &&
            distance(adm, x, NormKind::L2) < r) {
          ++step_ok;
          best = adm;
          run.offer(best);
        }
      }
      if (sph_trials == kAdaptWindow) {
        spherical_step *= 2 * sph_ok > kAdaptWindow ? 1.1 : 0.9;
        sph_trials = sph_ok = 0;
      }
      if (step_trials == kAdaptWindow) {
        source_step *= 2 * step_ok > kAdaptWindow ? 1.1 : 0.9;
        step_trials = step_ok = 0;
      }
    }
  });
}

}  // namespace stealth
