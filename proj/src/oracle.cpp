#include "stealth/oracle.hpp"

#include <cmath>

#include "stealth/errors.hpp"

namespace stealth {

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Init: return "init";
    case Phase::ProjBoundary: return "proj_boundary";
    case Phase::UpdateDir: return "update_dir";
    case Phase::StepSize: return "step_size";
  }
  return "?";
}

void QueryLedger::record(Phase p, Verdict v) {
  auto& c = by_phase[static_cast<std::size_t>(p)];
  ++total;
  ++c.total;
  if (v == Verdict::Flagged) {
    ++flagged;
    ++c.flagged;
  }
}

bool QueryLedger::consistent() const {
  std::int64_t t = 0, f = 0;
  for (const auto& c : by_phase) {
    if (c.flagged > c.total || c.flagged < 0) return false;
    t += c.total;
    f += c.flagged;
  }
  return t == total && f == flagged && flagged <= total;
}

namespace {
void check_grid(const std::optional<double>& grid) {
  if (grid) (void)grid_levels(*grid);
}
}  // namespace

LinearOracle::LinearOracle(Vec w, double b, bool flag_positive, std::optional<double> grid)
    : w_(std::move(w)), b_(b), flag_positive_(flag_positive), grid_(grid) {
  if (w_.empty() || !(norm(w_, NormKind::L2) > 0.0)) {
    throw ParameterError("linear oracle needs a non-zero weight vector");
  }
  check_grid(grid_);
}

double LinearOracle::score(std::span<const double> p) const { return dot(w_, p) + b_; }

Verdict LinearOracle::decide(std::span<const double> p) {
  const double s = score(p);
  const bool flagged = flag_positive_ ? s >= 0.0 : s <= 0.0;
  return flagged ? Verdict::Flagged : Verdict::Safe;
}

OracleDescriptor LinearOracle::descriptor() const {
  return {w_.size(), grid_, kProtocolVersion};
}

SphereOracle::SphereOracle(Point center, double radius, bool flagged_inside,
                           std::optional<double> grid)
    : center_(std::move(center)), radius_(radius), flagged_inside_(flagged_inside), grid_(grid) {
  if (center_.empty()) throw ParameterError("sphere oracle needs a center");
  if (!(radius_ > 0.0)) throw ParameterError("sphere radius must be positive");
  for (double c : center_) {
    if (c < 0.0 || c > 1.0) throw ParameterError("sphere center must lie in [0,1]^d");
  }
  check_grid(grid_);
}

Verdict SphereOracle::decide(std::span<const double> p) {
  const bool inside = distance(p, center_, NormKind::L2) <= radius_;
  return inside == flagged_inside_ ? Verdict::Flagged : Verdict::Safe;
}

OracleDescriptor SphereOracle::descriptor() const {
  return {center_.size(), grid_, kProtocolVersion};
}

InstrumentedOracle::InstrumentedOracle(DecisionOracle& inner)
    : inner_(inner), desc_(inner.descriptor()) {}

Verdict InstrumentedOracle::query(std::span<const double> p, Phase phase) {
  if (p.size() != desc_.dimension) {
    throw DimensionError("query of dimension " + std::to_string(p.size()) +
                         " to an oracle of dimension " + std::to_string(desc_.dimension));
  }
  if (desc_.quantization_grid && !on_grid(p, *desc_.quantization_grid)) {
    throw ContractViolation("off-grid query to a quantized oracle");
  }
  const Verdict v = inner_.decide(p);
  ledger_.record(phase, v);
  if (observer_) observer_(p, v, phase);
  return v;
}

Point InstrumentedOracle::admissible(std::span<const double> p) const {
  Point out = clip_unit(p);
  if (desc_.quantization_grid) out = quantize(out, *desc_.quantization_grid);
  return out;
}

}  // namespace stealth
