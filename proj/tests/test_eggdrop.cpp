#include <doctest.h>

#include <algorithm>
#include <vector>

#include "stealth/eggdrop.hpp"
#include "stealth/errors.hpp"

using namespace stealth;

namespace {

// Minimax worst case over all adaptive strategies, computed by exhaustive
// search over the first probe position at every state.
std::vector<std::vector<std::int64_t>> brute_force(int max_n, int max_k) {
  std::vector<std::vector<std::int64_t>> w(max_k + 1, std::vector<std::int64_t>(max_n + 1, 0));
  for (int k = 1; k <= max_k; ++k) {
    for (int n = 1; n <= max_n; ++n) {
      std::int64_t best = INT64_MAX;
      for (int p = 1; p <= n; ++p) {
        // Breaks: p-1 floors below remain with one egg fewer.
        const std::int64_t broke = k == 1 ? (p == 1 ? 0 : INT64_MAX / 2) : w[k - 1][p - 1];
        const std::int64_t survived = w[k][n - p];
        best = std::min(best, 1 + std::max(broke, survived));
      }
      w[k][n] = best;
    }
  }
  return w;
}

}  // namespace

TEST_CASE("spot values") {
  CHECK(egg_drop_plan(100, 2).worst_case_trials == 14);
  CHECK(egg_drop_plan(10000, 2).worst_case_trials == 141);
  for (std::int64_t n : {1, 7, 100, 5000}) CHECK(egg_drop_plan(n, 1).worst_case_trials == n);
  CHECK(egg_drop_coverage(14, 2) == 105);
  CHECK_THROWS_AS(egg_drop_plan(0, 2), ParameterError);
  CHECK_THROWS_AS(egg_drop_plan(10, 0), ParameterError);
}

TEST_CASE("DP matches brute-force minimax for N <= 200, k <= 4") {
  const auto w = brute_force(200, 4);
  for (int k = 1; k <= 4; ++k) {
    for (int n = 1; n <= 200; ++n) {
      REQUIRE(egg_drop_trials(n, k) == w[k][n]);
      REQUIRE(egg_drop_plan(n, k).worst_case_trials == w[k][n]);
    }
  }
}

TEST_CASE("first probe schedule is consistent with the worst case") {
  for (int k = 1; k <= 4; ++k) {
    for (int n = 1; n <= 200; ++n) {
      const auto plan = egg_drop_plan(n, k);
      const auto& s = plan.first_probe_schedule;
      REQUIRE(!s.empty());
      CHECK(s.back() == n);
      CHECK(std::is_sorted(s.begin(), s.end()));
      // A break at the j-th probe leaves the gap below it for k-1 eggs.
      std::int64_t prev = 0;
      for (std::size_t j = 0; j < s.size(); ++j) {
        const std::int64_t gap = s[j] - prev - 1;
        const std::int64_t rest = gap == 0 ? 0 : (k == 1 ? INT64_MAX / 2 : egg_drop_trials(gap, k - 1));
        CHECK(static_cast<std::int64_t>(j) + 1 + rest <= plan.worst_case_trials);
        prev = s[j];
      }
      const std::int64_t p = egg_drop_next_probe(n, k);
      CHECK(p == s.front());
    }
  }
}
