#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "stealth/vectorspace.hpp"

namespace stealth {

enum class Verdict { Flagged, Safe };

inline bool is_safe(Verdict v) { return v == Verdict::Safe; }

// Which part of an attack iteration issued a query.
enum class Phase { Init = 0, ProjBoundary = 1, UpdateDir = 2, StepSize = 3 };
inline constexpr std::size_t kPhaseCount = 4;
const char* to_string(Phase p);

struct PhaseCount {
  std::int64_t total = 0;
  std::int64_t flagged = 0;
  friend bool operator==(const PhaseCount&, const PhaseCount&) = default;
};

struct QueryLedger {
  std::int64_t total = 0;
  std::int64_t flagged = 0;
  std::array<PhaseCount, kPhaseCount> by_phase{};

  std::int64_t safe() const { return total - flagged; }
  const PhaseCount& phase(Phase p) const { return by_phase[static_cast<std::size_t>(p)]; }
  void record(Phase p, Verdict v);
  // Holds when the per-phase counters sum to the totals and flagged <= total.
  bool consistent() const;

  friend bool operator==(const QueryLedger&, const QueryLedger&) = default;
};

struct OracleDescriptor {
  std::size_t dimension = 0;
  std::optional<double> quantization_grid;
  int protocol_version = 1;
};

inline constexpr int kProtocolVersion = 1;

// The black box. Implementations must be deterministic for a fixed
// instance; they never see phases or budgets.
class DecisionOracle {
 public:
  virtual ~DecisionOracle() = default;
  virtual Verdict decide(std::span<const double> p) = 0;
  virtual OracleDescriptor descriptor() const = 0;
};

// Flagged iff sign * (w.x + b) >= 0 (sign = +1 by default).
class LinearOracle final : public DecisionOracle {
 public:
  LinearOracle(Vec w, double b, bool flag_positive = true,
               std::optional<double> grid = std::nullopt);
  Verdict decide(std::span<const double> p) override;
  OracleDescriptor descriptor() const override;

  const Vec& weights() const { return w_; }
  double bias() const { return b_; }
  bool flag_positive() const { return flag_positive_; }
  double score(std::span<const double> p) const;

 private:
  Vec w_;
  double b_;
  bool flag_positive_;
  std::optional<double> grid_;
};

// Flagged inside the ball (or outside when flagged_inside is false).
class SphereOracle final : public DecisionOracle {
 public:
  SphereOracle(Point center, double radius, bool flagged_inside = true,
               std::optional<double> grid = std::nullopt);
  Verdict decide(std::span<const double> p) override;
  OracleDescriptor descriptor() const override;

  const Point& center() const { return center_; }
  double radius() const { return radius_; }
  bool flagged_inside() const { return flagged_inside_; }

 private:
  Point center_;
  double radius_;
  bool flagged_inside_;
  std::optional<double> grid_;
};

using ProbeObserver = std::function<void(std::span<const double>, Verdict, Phase)>;

// Wraps a DecisionOracle with contract checks and the authoritative ledger.
// One instance per attack run; not thread-safe.
class InstrumentedOracle {
 public:
  explicit InstrumentedOracle(DecisionOracle& inner);

  /// Exactly one ledger increment per call. Throws DimensionError on a
  /// dimension mismatch and ContractViolation for off-grid points when the
  /// oracle declares a grid.
  Verdict query(std::span<const double> p, Phase phase);

  QueryLedger snapshot() const { return ledger_; }
  const OracleDescriptor& descriptor() const { return desc_; }
  std::size_t dimension() const { return desc_.dimension; }
  std::optional<double> grid() const { return desc_.quantization_grid; }

  // Maps an arbitrary point to a valid query point: clipped to the cube and,
  // for quantized oracles, snapped to the grid.
  Point admissible(std::span<const double> p) const;

  void set_observer(ProbeObserver obs) { observer_ = std::move(obs); }

 private:
  DecisionOracle& inner_;
  OracleDescriptor desc_;
  QueryLedger ledger_;
  ProbeObserver observer_;
};

}  // namespace stealth
