// RayS: hierarchical sign-flip search over Linf ray directions.

#include <cmath>
#include <limits>

#include "stealth/attacks.hpp"
#include "stealth/errors.hpp"

namespace stealth {

namespace {

AttackTrace run_rays(DecisionOracle& o, const Point& x, const AttackConfig& cfg, bool stealthy) {
  if (cfg.norm != NormKind::Linf) throw ParameterError("RayS supports Linf only");
  AttackRun run(o, x, cfg, stealthy ? "stealthy-rays" : "rays");
  SearchStrategy strategy = cfg.strategy.value_or(stealthy ? SearchStrategy::line(1e-3, true)
                                                           : SearchStrategy::binary(1e-3, true));
  if (stealthy && cfg.early_stop && !strategy.early_stop) {
    strategy = strategy.with_early_stop(cfg.rays_early_stop);
  }
  return run.execute([&] {
    const std::size_t d = run.dim();
    Vec sgn(d, 1.0);
    double d_t = std::numeric_limits<double>::infinity();
    int level = 0;
    std::size_t block = 0;
    for (;;) {
      run.next_iteration();
      const std::size_t blocks = std::size_t{1} << level;
      const std::size_t size = (d + blocks - 1) / blocks;
      const std::size_t start = block * size;
      const std::size_t end = std::min(d, start + size);
      Vec attempt = sgn;
      for (std::size_t i = start; i < end; ++i) attempt[i] = -attempt[i];
      const PathFn path = [&x, attempt](double t) { return axpy(x, t, attempt); };

      if (std::isinf(d_t)) {
        if (run.check_point(path(1.0), Phase::Init) == Verdict::Safe) {
          const SearchOutcome out = run.get_dist(path, 0.0, 1.0, strategy, Phase::Init);
          d_t = out.distance;
          sgn = attempt;
          run.offer(out.point);
        }
      } else if (run.check_point(path(d_t), Phase::StepSize) == Verdict::Safe) {
        const SearchOutcome out =
            run.get_dist(path, 0.0, d_t, strategy, Phase::ProjBoundary, d_t);
        if (out.distance < d_t) {
          d_t = out.distance;
          sgn = attempt;
          run.offer(out.point);
        }
      }

      ++block;
      if (block == blocks || end == d) {
        if (size > 1) ++level;
        block = 0;
      }
    }
  });
}

}  // namespace

AttackTrace attack_rays(DecisionOracle& o, const Point& x, const AttackConfig& cfg) {
  return run_rays(o, x, cfg, false);
}

AttackTrace attack_stealthy_rays(DecisionOracle& o, const Point& x, const AttackConfig& cfg) {
  return run_rays(o, x, cfg, true);
}

}  // namespace stealth
