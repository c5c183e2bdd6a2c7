#include "stealth/eggdrop.hpp"

#include <algorithm>
#include <limits>

#include "stealth/errors.hpp"

namespace stealth {

namespace {
constexpr std::int64_t kSat = std::numeric_limits<std::int64_t>::max();

std::int64_t sat_add(std::int64_t a, std::int64_t b) {
  return (a > kSat - b) ? kSat : a + b;
}
}  // namespace

std::int64_t egg_drop_coverage(std::int64_t trials, int eggs) {
  if (trials <= 0 || eggs <= 0) return 0;
  // f(t, e) = sum_{i=1..e} C(t, i)
  std::int64_t total = 0;
  std::int64_t binom = 1;  // C(t, 0)
  for (int i = 1; i <= eggs && i <= trials; ++i) {
    // C(t, i) = C(t, i-1) * (t - i + 1) / i, guarding overflow
    const std::int64_t num = trials - i + 1;
    if (binom > kSat / num) return kSat;
    binom = binom * num / i;
    total = sat_add(total, binom);
    if (total == kSat) return kSat;
  }
  return total;
}

std::int64_t egg_drop_trials(std::int64_t floors, int eggs) {
  if (floors <= 0) return 0;
  if (eggs <= 0) throw ParameterError("egg drop needs at least one egg");
  if (eggs == 1) return floors;
  // coverage grows at least linearly in t, so a doubling bracket then bisection
  std::int64_t hi = 1;
  while (egg_drop_coverage(hi, eggs) < floors) hi *= 2;
  std::int64_t lo = hi / 2;  // coverage(lo) < floors (or lo == 0)
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (egg_drop_coverage(mid, eggs) >= floors) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::int64_t egg_drop_next_probe(std::int64_t floors, int eggs) {
  if (floors <= 0) return 0;
  if (eggs <= 1) return 1;
  const std::int64_t t = egg_drop_trials(floors, eggs);
  return std::min(floors, egg_drop_coverage(t - 1, eggs - 1) + 1);
}

EggDropPlan egg_drop_plan(std::int64_t floors, int eggs) {
  if (floors < 1 || eggs < 1) throw ParameterError("egg_drop_plan needs floors >= 1 and eggs >= 1");
  EggDropPlan plan;
  plan.worst_case_trials = egg_drop_trials(floors, eggs);
  std::int64_t pos = 0;
  for (std::int64_t t = plan.worst_case_trials; pos < floors && t > 0; --t) {
    pos = std::min(floors, pos + egg_drop_coverage(t - 1, eggs - 1) + 1);
    plan.first_probe_schedule.push_back(pos);
  }
  return plan;
}

}  // namespace stealth
