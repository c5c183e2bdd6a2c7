#pragma once

#include <cstdint>
#include <vector>

namespace stealth {

// Worst-case probe counts for locating a boundary among `floors` unknown
// positions when at most `eggs` probes may land on the flagged side.

struct EggDropPlan {
  std::int64_t worst_case_trials = 0;
  // Offsets (1-based, cumulative) at which the first egg is dropped while it
  // keeps surviving; realizes worst_case_trials.
  std::vector<std::int64_t> first_probe_schedule;
};

/// Number of floors that `trials` drops with `eggs` eggs can resolve:
/// f(t, e) = f(t-1, e-1) + f(t-1, e) + 1. Saturates at INT64_MAX.
std::int64_t egg_drop_coverage(std::int64_t trials, int eggs);

/// Smallest t with egg_drop_coverage(t, eggs) >= floors.
std::int64_t egg_drop_trials(std::int64_t floors, int eggs);

/// Offset of the next probe inside `floors` unknown positions so that the
/// remaining worst case stays optimal.
std::int64_t egg_drop_next_probe(std::int64_t floors, int eggs);

/// Throws ParameterError unless floors >= 1 and eggs >= 1.
EggDropPlan egg_drop_plan(std::int64_t floors, int eggs);

}  // namespace stealth
