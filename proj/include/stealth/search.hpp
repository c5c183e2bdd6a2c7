#pragma once

// Boundary-distance primitives: checkAdv (one query) and getDist (a search
// along a path from a known-safe point toward the flagged original).
//
// Every search works on a ladder of N "floors" between the safe end
// (floor 0, distance hi) and the flagged end (floor N, distance lo). A
// binary search bisects the ladder; a line search walks it from the safe
// end one floor at a time and breaks at most one egg; a k-stage search walks
// it with shrinking strides and breaks at most k.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "stealth/oracle.hpp"

namespace stealth {

enum class SearchKind { Binary, Line, KStage };
enum class Schedule { Uniform, DpOptimal };

struct SearchStrategy {
  SearchKind kind = SearchKind::Binary;
  // Binary: tolerance; Line: step; KStage: 1/N. A fraction of the search
  // interval unless `absolute`, in which case it is in distance units.
  double resolution = 1e-3;
  bool absolute = false;
  int stages = 1;
  Schedule schedule = Schedule::Uniform;
  std::optional<double> early_stop;  // gamma in (0,1)

  static SearchStrategy binary(double eta, bool absolute = false);
  static SearchStrategy line(double step, bool absolute = false);
  static SearchStrategy kstage(int k, std::int64_t subintervals, Schedule schedule = Schedule::Uniform);
  SearchStrategy with_early_stop(double gamma) const;

  bool is_binary() const { return kind == SearchKind::Binary; }
  void validate() const;
  std::string describe() const;
};

struct SearchOutcome {
  double distance = 0.0;
  // False when early-stopped, clamped at an unverified lower end, or an
  // approximation was substituted for a failed safe start.
  bool exact = true;
  std::int64_t flagged_spent = 0;
  std::int64_t total_spent = 0;
  Point point;  // the admissible safe point realizing `distance` (may be empty)
};

// Maps a scalar distance parameter to a raw (unclipped) point.
using PathFn = std::function<Point(double)>;

// Issues probes along a path, clipping/quantizing them and skipping a probe
// that lands on a point this prober already queried. Tracks what it spent.
class PathProber {
 public:
  PathProber(InstrumentedOracle& oracle, PathFn path, Phase phase);
  Verdict probe(double t);
  Point point_at(double t) const { return oracle_.admissible(path_(t)); }

  std::int64_t flagged() const { return flagged_; }
  std::int64_t total() const { return total_; }
  InstrumentedOracle& oracle() { return oracle_; }

 private:
  InstrumentedOracle& oracle_;
  PathFn path_;
  Phase phase_;
  bool quantized_;
  Point last_;
  Verdict last_verdict_ = Verdict::Flagged;
  std::vector<std::pair<Point, Verdict>> seen_;
  std::int64_t flagged_ = 0;
  std::int64_t total_ = 0;
};

/// Number of ladder floors a strategy uses over an interval of length
/// `length`, after flooring the resolution at `grid` when given.
std::int64_t ladder_floors(const SearchStrategy& s, double length, std::optional<double> grid);

/// Searches path(t) for t in [lo, hi]: path(hi) must be safe (already
/// established by the caller). When `lo_known_flagged` the lower end is
/// taken as flagged and never probed; otherwise it is a probe-able floor and
/// a search that stays safe all the way down returns lo with exact=false.
/// `reference` enables early stopping for strategies that carry it.
SearchOutcome search_path(InstrumentedOracle& oracle, const PathFn& path, double lo, double hi,
                          const SearchStrategy& strategy, Phase phase,
                          std::optional<double> reference = std::nullopt,
                          bool lo_known_flagged = true);

enum class EndpointCheck { Trust, Verify };

/// Distance from x to the boundary on the segment [x, x_safe], in `norm`.
/// With EndpointCheck::Verify both endpoints are queried first (and charged
/// to the outcome); same-side endpoints raise ContractViolation.
SearchOutcome get_dist_binary(InstrumentedOracle& oracle, const Point& x, const Point& x_safe,
                              double eta, Phase phase, NormKind norm = NormKind::L2,
                              EndpointCheck check = EndpointCheck::Trust);

SearchOutcome get_dist_line(InstrumentedOracle& oracle, const Point& x, const Point& x_safe,
                            const SearchStrategy& strategy,
                            std::optional<double> reference, Phase phase,
                            NormKind norm = NormKind::L2,
                            EndpointCheck check = EndpointCheck::Trust);

/// One query at x + dist * theta / ||theta||.
Verdict check_adv(InstrumentedOracle& oracle, const Point& x, std::span<const double> theta,
                  double dist, Phase phase, NormKind norm = NormKind::L2);

struct StepSearchResult {
  double step = 0.0;
  double distance = 0.0;  // boundary distance at `step` (expand search)
  int evaluations = 0;    // inner getDist calls / probes
  bool improved = false;
  SearchOutcome cost;     // ledger deltas across the whole search
  Point point;            // backtrack search: the accepted safe point
};

// Boundary distance along the direction obtained with step size alpha, or
// nullopt when no safe point was found along it.
using StepDistanceFn = std::function<std::optional<double>(double alpha)>;

/// Starting from alpha0, doubles the step while the boundary distance keeps
/// decreasing below `current`. Each evaluation is one getDist call.
StepSearchResult geometric_expand_search(InstrumentedOracle& oracle, const StepDistanceFn& dist_at,
                                         double current, double alpha0, int max_doublings = 15);

/// Halves alpha from alpha0 until x_b + alpha * delta is safe. Throws
/// DegenerateDirectionError when alpha drops below 1e-12 * alpha0.
StepSearchResult geometric_backtrack_search(InstrumentedOracle& oracle, const Point& x_b,
                                            std::span<const double> delta, double alpha0,
                                            Phase phase);

}  // namespace stealth
