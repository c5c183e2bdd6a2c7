#include "stealth/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "stealth/eggdrop.hpp"
#include "stealth/errors.hpp"

namespace stealth {

SearchStrategy SearchStrategy::binary(double eta, bool absolute) {
  SearchStrategy s;
  s.kind = SearchKind::Binary;
  s.resolution = eta;
  s.absolute = absolute;
  s.validate();
  return s;
}

SearchStrategy SearchStrategy::line(double step, bool absolute) {
  SearchStrategy s;
  s.kind = SearchKind::Line;
  s.resolution = step;
  s.absolute = absolute;
  s.validate();
  return s;
}

SearchStrategy SearchStrategy::kstage(int k, std::int64_t subintervals, Schedule schedule) {
  if (subintervals < 1) throw ParameterError("k-stage search needs N >= 1");
  SearchStrategy s;
  s.kind = SearchKind::KStage;
  s.stages = k;
  s.resolution = 1.0 / static_cast<double>(subintervals);
  s.schedule = schedule;
  s.validate();
  return s;
}

SearchStrategy SearchStrategy::with_early_stop(double gamma) const {
  SearchStrategy s = *this;
  s.early_stop = gamma;
  s.validate();
  return s;
}

void SearchStrategy::validate() const {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw ParameterError("search resolution must be positive");
  }
  if (!absolute && kind == SearchKind::Binary && !(resolution < 1.0)) {
    throw ParameterError("binary search tolerance must lie in (0,1)");
  }
  if (!absolute && resolution > 1.0) throw ParameterError("relative search step must be <= 1");
  if (kind == SearchKind::KStage && stages < 1) throw ParameterError("k-stage search needs k >= 1");
  if (early_stop && !(*early_stop > 0.0 && *early_stop < 1.0)) {
    throw ParameterError("early-stop factor must lie in (0,1)");
  }
}

std::string SearchStrategy::describe() const {
  std::ostringstream os;
  switch (kind) {
    case SearchKind::Binary: os << "binary(" << resolution; break;
    case SearchKind::Line: os << "line(" << resolution; break;
    case SearchKind::KStage:
      os << "kstage(k=" << stages << ",res=" << resolution
         << (schedule == Schedule::DpOptimal ? ",dp" : ",uniform");
      break;
  }
  if (absolute) os << ",abs";
  if (early_stop) os << ",es=" << *early_stop;
  os << ')';
  return os.str();
}

PathProber::PathProber(InstrumentedOracle& oracle, PathFn path, Phase phase)
    : oracle_(oracle), path_(std::move(path)), phase_(phase),
      quantized_(oracle.grid().has_value()) {}

Verdict PathProber::probe(double t) {
  Point p = oracle_.admissible(path_(t));
  if (total_ > 0 && p == last_) return last_verdict_;
  if (quantized_) {
    for (const auto& [q, v] : seen_) {
      if (q == p) return v;
    }
  }
  const Verdict v = oracle_.query(p, phase_);
  ++total_;
  if (v == Verdict::Flagged) ++flagged_;
  if (quantized_) seen_.emplace_back(p, v);
  last_ = std::move(p);
  last_verdict_ = v;
  return v;
}

std::int64_t ladder_floors(const SearchStrategy& s, double length, std::optional<double> grid) {
  if (!(length > 0.0)) return 1;
  double abs_res = s.absolute ? s.resolution : s.resolution * length;
  bool grid_bound = false;
  if (grid && abs_res <= *grid) {
    abs_res = *grid;
    grid_bound = true;
  }
  const double ratio = length / abs_res;
  if (s.kind == SearchKind::Binary && !grid_bound) {
    const double bits = std::ceil(std::log2(ratio) - 1e-12);
    return bits <= 0 ? 1 : static_cast<std::int64_t>(std::llround(std::exp2(bits)));
  }
  if (!s.absolute && !grid_bound) {
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(1.0 / s.resolution - 1e-9)));
  }
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(ratio - 1e-9)));
}

namespace {

std::vector<std::int64_t> uniform_widths(std::int64_t n, int k) {
  std::vector<std::int64_t> w;
  for (int i = 1; i <= k; ++i) {
    const double e = static_cast<double>(k - i) / k;
    auto wi = static_cast<std::int64_t>(std::ceil(std::pow(static_cast<double>(n), e) - 1e-9));
    wi = std::max<std::int64_t>(1, wi);
    if (!w.empty()) wi = std::min(wi, w.back());
    w.push_back(wi);
  }
  w.back() = 1;
  return w;
}

}  // namespace

SearchOutcome search_path(InstrumentedOracle& oracle, const PathFn& path, double lo, double hi,
                          const SearchStrategy& strategy, Phase phase,
                          std::optional<double> reference, bool lo_known_flagged) {
  strategy.validate();
  PathProber prober(oracle, path, phase);
  SearchOutcome out;
  if (!(hi > lo)) {
    out.distance = hi;
    out.point = prober.point_at(hi);
    return out;
  }
  const std::int64_t n = ladder_floors(strategy, hi - lo, oracle.grid());
  const double step = (hi - lo) / static_cast<double>(n);
  auto t_of = [&](std::int64_t j) { return j >= n ? lo : hi - static_cast<double>(j) * step; };

  std::int64_t s = 0;                              // highest known-safe floor
  std::int64_t f = lo_known_flagged ? n : n + 1;  // lowest known-flagged floor
  const bool es_enabled = strategy.early_stop && reference;
  const double es_threshold = es_enabled ? *strategy.early_stop * *reference : 0.0;
  bool early = false;

  auto stop_early = [&] {
    return es_enabled && prober.flagged() == 0 && t_of(s) <= es_threshold;
  };
  // Returns true when the probed floor is safe.
  auto visit = [&](std::int64_t j) {
    if (prober.probe(t_of(j)) == Verdict::Safe) {
      s = j;
      return true;
    }
    f = j;
    return false;
  };

  early = stop_early();
  if (!early) {
    switch (strategy.kind) {
      case SearchKind::Binary:
        while (f - s > 1) {
          visit(s + (f - s) / 2);
          if ((early = stop_early())) break;
        }
        break;
      case SearchKind::Line:
      case SearchKind::KStage: {
        const int k = strategy.kind == SearchKind::Line ? 1 : strategy.stages;
        if (strategy.kind == SearchKind::KStage && strategy.schedule == Schedule::DpOptimal) {
          int eggs = k;
          while (f - s > 1 && !early) {
            const std::int64_t unknown = f - s - 1;
            const std::int64_t p = eggs <= 1 ? 1 : egg_drop_next_probe(unknown, eggs);
            if (!visit(s + p)) --eggs;
            early = stop_early();
          }
        } else {
          for (std::int64_t w : uniform_widths(n, k)) {
            for (std::int64_t j = s + w; j < f; j += w) {
              if (!visit(j)) break;
              if ((early = stop_early())) break;
            }
            if (early) break;
          }
        }
        break;
      }
    }
  }

  out.distance = t_of(s);
  out.exact = !early && !(s == n && !lo_known_flagged);
  out.flagged_spent = prober.flagged();
  out.total_spent = prober.total();
  out.point = prober.point_at(out.distance);
  return out;
}

namespace {

struct Segment {
  Point x;
  Vec unit;
  double length;
};

Segment make_segment(const Point& x, const Point& x_safe, NormKind norm) {
  check_same_dim(x, x_safe);
  Vec dir = sub(x_safe, x);
  const double len = norm == NormKind::L2 ? stealth::norm(dir, NormKind::L2)
                                           : stealth::norm(dir, NormKind::Linf);
  if (!(len > 0.0)) throw ContractViolation("search endpoints coincide");
  return {x, scale(dir, 1.0 / len), len};
}

SearchOutcome verify_then(InstrumentedOracle& oracle, const Point& x, const Point& x_safe,
                          Phase phase, EndpointCheck check,
                          const std::function<SearchOutcome()>& body) {
  std::int64_t f = 0, t = 0;
  if (check == EndpointCheck::Verify) {
    const Verdict a = oracle.query(oracle.admissible(x), phase);
    const Verdict b = oracle.query(oracle.admissible(x_safe), phase);
    t = 2;
    f = (a == Verdict::Flagged) + (b == Verdict::Flagged);
    if (a != Verdict::Flagged || b != Verdict::Safe) {
      throw ContractViolation("search endpoints must be flagged (x) and safe (x_safe)");
    }
  }
  SearchOutcome out = body();
  out.flagged_spent += f;
  out.total_spent += t;
  return out;
}

}  // namespace

SearchOutcome get_dist_binary(InstrumentedOracle& oracle, const Point& x, const Point& x_safe,
                              double eta, Phase phase, NormKind norm, EndpointCheck check) {
  const Segment seg = make_segment(x, x_safe, norm);
  const auto strategy = SearchStrategy::binary(eta);
  return verify_then(oracle, x, x_safe, phase, check, [&] {
    return search_path(
        oracle, [&](double t) { return axpy(seg.x, t, seg.unit); }, 0.0, seg.length, strategy,
        phase);
  });
}

SearchOutcome get_dist_line(InstrumentedOracle& oracle, const Point& x, const Point& x_safe,
                            const SearchStrategy& strategy, std::optional<double> reference,
                            Phase phase, NormKind norm, EndpointCheck check) {
  const Segment seg = make_segment(x, x_safe, norm);
  return verify_then(oracle, x, x_safe, phase, check, [&] {
    return search_path(
        oracle, [&](double t) { return axpy(seg.x, t, seg.unit); }, 0.0, seg.length, strategy,
        phase, reference);
  });
}

Verdict check_adv(InstrumentedOracle& oracle, const Point& x, std::span<const double> theta,
                  double dist, Phase phase, NormKind norm) {
  if (dist < 0.0) throw ParameterError("check_adv distance must be non-negative");
  const double n = stealth::norm(theta, norm);
  if (!(n > 0.0)) throw DimensionError("check_adv needs a non-zero direction");
  return oracle.query(oracle.admissible(axpy(x, dist / n, theta)), phase);
}

StepSearchResult geometric_expand_search(InstrumentedOracle& oracle, const StepDistanceFn& dist_at,
                                         double current, double alpha0, int max_doublings) {
  if (!(alpha0 > 0.0)) throw ParameterError("initial step must be positive");
  const QueryLedger before = oracle.snapshot();
  StepSearchResult r;
  r.distance = current;
  double alpha = alpha0;
  for (int i = 0; i < max_doublings; ++i) {
    const auto d = dist_at(alpha);
    ++r.evaluations;
    if (!d || !(*d < r.distance)) break;
    r.distance = *d;
    r.step = alpha;
    r.improved = true;
    alpha *= 2.0;
  }
  const QueryLedger after = oracle.snapshot();
  r.cost.flagged_spent = after.flagged - before.flagged;
  r.cost.total_spent = after.total - before.total;
  r.cost.distance = r.distance;
  return r;
}

StepSearchResult geometric_backtrack_search(InstrumentedOracle& oracle, const Point& x_b,
                                            std::span<const double> delta, double alpha0,
                                            Phase phase) {
  if (!(alpha0 > 0.0)) throw ParameterError("initial step must be positive");
  PathProber prober(oracle, [&](double a) { return axpy(x_b, a, delta); }, phase);
  StepSearchResult r;
  double alpha = alpha0;
  for (;;) {
    ++r.evaluations;
    if (prober.probe(alpha) == Verdict::Safe) break;
    alpha *= 0.5;
    if (alpha < 1e-12 * alpha0) {
      throw DegenerateDirectionError("step-size backtracking underflowed; direction never turns safe");
    }
  }
  r.step = alpha;
  r.improved = true;
  r.point = prober.point_at(alpha);
  r.cost.flagged_spent = prober.flagged();
  r.cost.total_spent = prober.total();
  r.cost.point = r.point;
  return r;
}

}  // namespace stealth
