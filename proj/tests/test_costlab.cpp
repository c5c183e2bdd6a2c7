#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "stealth/costlab.hpp"
#include "stealth/errors.hpp"

using namespace stealth;

namespace {

AttackTrace make_trace(std::string attack, std::vector<TraceEvent> events) {
  AttackTrace t;
  t.header.attack = std::move(attack);
  t.events = std::move(events);
  if (!t.events.empty()) {
    t.summary.ledger.total = t.events.back().t;
    t.summary.ledger.flagged = t.events.back().f;
    t.summary.ledger.by_phase[0] = {t.events.back().t, t.events.back().f};
    t.summary.tally.check_adv_queries = t.events.back().t;
    t.summary.tally.check_adv_flagged = t.events.back().f;
    t.summary.best_distance = t.events.back().d;
    t.summary.x_adv = {0.25, 0.5};
  }
  t.header.oracle.dimension = 2;
  t.summary.stop_reason = StopReason::FlaggedBudget;
  return t;
}

AttackTrace random_trace(std::mt19937_64& rng) {
  std::vector<TraceEvent> ev;
  std::int64_t f = 0, t = 0;
  double d = 1.0 + std::uniform_real_distribution<double>(0, 1)(rng);
  const int n = 1 + static_cast<int>(rng() % 30);
  for (int i = 0; i < n; ++i) {
    f += static_cast<std::int64_t>(rng() % 20);
    t += f == 0 ? 1 : static_cast<std::int64_t>(rng() % 50) + 1;
    t = std::max(t, f);
    d *= std::uniform_real_distribution<double>(0.5, 0.99)(rng);
    ev.push_back({f, t, d});
  }
  return make_trace("r", ev);
}

}  // namespace

TEST_CASE("cost_of examples") {
  CHECK(cost_of(328, 244, {0.0, 1.0}) == 244.0);
  CHECK(cost_of(1752, 953, {1e-3, 1.0}) == doctest::Approx(954.752).epsilon(1e-12));
  CHECK(cost_of(1752, 953, {1.0, 0.0}) == 1752.0);
  QueryLedger l;
  l.total = 10;
  l.flagged = 4;
  CHECK(cost_of(l, {0.5, 2.0}) == 13.0);
  CHECK_THROWS_AS(CostModel({-1.0, 1.0}).validate(), ParameterError);
}

TEST_CASE("cost_of is linear in counters and prices") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::int64_t> q(0, 100000);
  std::uniform_real_distribution<double> c(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const std::int64_t t1 = q(rng), t2 = q(rng), f1 = q(rng), f2 = q(rng);
    const CostModel m{c(rng), c(rng)}, n{c(rng), c(rng)};
    CHECK(cost_of(t1 + t2, f1 + f2, m) == doctest::Approx(cost_of(t1, f1, m) + cost_of(t2, f2, m)));
    CHECK(cost_of(t1, f1, {m.c0 + n.c0, m.c_flagged + n.c_flagged}) ==
          doctest::Approx(cost_of(t1, f1, m) + cost_of(t1, f1, n)));
  }
}

TEST_CASE("accounts needed") {
  const ModerationPolicy p;
  CHECK(accounts_needed(79, p) == 12);
  CHECK(accounts_needed(172, p) == 25);
  CHECK(accounts_needed(0, p) == 0);
  CHECK(accounts_needed(7, p) == 1);
  CHECK(accounts_needed(8, p) == 2);
  for (std::int64_t f = 0; f < 2000; ++f) {
    const auto step = accounts_needed(f + 1, p) - accounts_needed(f, p);
    CHECK((step == 0 || step == 1));
  }
  ModerationPolicy b;
  b.benign_limit_per_account = 100;
  CHECK(accounts_needed(1000, 7, b) == 10);
  CHECK(accounts_needed(50, 7, b) == 1);
  CHECK_THROWS_AS(accounts_needed(5, ModerationPolicy{0, std::nullopt}), ParameterError);
}

TEST_CASE("median curve examples") {
  const std::vector<AttackTrace> three = {make_trace("a", {{5, 10, 1.0}}), make_trace("a", {{5, 10, 2.0}}),
                                          make_trace("a", {{5, 10, 3.0}})};
  const auto c = median_curve(three, {5});
  CHECK(c[0].median == 2.0);
  CHECK(c[0].q25 == 1.0);
  CHECK(c[0].q75 == 2.0);
  CHECK(c[0].median_total == 10);

  // Below the first event each trace contributes its first distance.
  const std::vector<AttackTrace> late = {make_trace("a", {{10, 20, 4.0}, {30, 60, 1.0}}),
                                         make_trace("a", {{12, 30, 6.0}})};
  const auto c2 = median_curve(late, {1, 11, 40});
  CHECK(c2[0].median == 4.0);
  CHECK(c2[1].median == 4.0);
  CHECK(c2[2].median == 1.0);
  CHECK(c2[0].median_total == 0);

  // Lower median on an even count.
  const std::vector<AttackTrace> four = {make_trace("a", {{0, 1, 4.0}}), make_trace("a", {{0, 1, 1.0}}),
                                         make_trace("a", {{0, 1, 3.0}}), make_trace("a", {{0, 1, 2.0}})};
  CHECK(median_curve(four, {0})[0].median == 2.0);

  CHECK_THROWS_AS(median_curve({}, {1}), ParameterError);
  CHECK_THROWS_AS(median_curve(three, {5, 1}), ParameterError);
  CHECK(best_within(make_trace("a", {}), 10) == std::numeric_limits<double>::infinity());
}

TEST_CASE("median curve matches a brute-force scan") {
  std::mt19937_64 rng(2);
  std::vector<AttackTrace> traces;
  for (int i = 0; i < 10; ++i) traces.push_back(random_trace(rng));
  std::vector<std::int64_t> budgets;
  for (std::int64_t b = 0; b <= 600; b += 7) budgets.push_back(b);
  const auto curve = median_curve(traces, budgets);
  for (std::size_t k = 0; k < budgets.size(); ++k) {
    std::vector<double> d;
    for (const auto& t : traces) {
      double best = t.events.front().d;
      for (const auto& e : t.events) {
        if (e.f <= budgets[k]) best = std::min(best, e.d);
      }
      d.push_back(best);
    }
    std::sort(d.begin(), d.end());
    CHECK(curve[k].median == d[(d.size() - 1) / 2]);
    CHECK(curve[k].q25 == d[(d.size() - 1) / 4]);
    CHECK(curve[k].q75 == d[(3 * (d.size() - 1)) / 4]);
    if (k) CHECK(curve[k].median <= curve[k - 1].median);
  }
  auto shuffled = traces;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto again = median_curve(shuffled, budgets);
  for (std::size_t k = 0; k < budgets.size(); ++k) CHECK(again[k].median == curve[k].median);
}

TEST_CASE("cost frontier rankings") {
  // "stealthy" reaches 0.5 with few flagged but many total queries.
  const CurvePoint s{40, 0.5, 0.5, 0.5, 40000};
  const CurvePoint b{200, 0.5, 0.5, 0.5, 400};
  const CurvePoint slow{150, 0.9, 0.9, 0.9, 300};
  std::map<std::string, std::vector<CurvePoint>> curves = {
      {"base", {b}}, {"stealthy", {s}}, {"never", {slow}}};
  auto rank = [&](CostModel m) {
    std::vector<std::string> r;
    for (const auto& e : cost_frontier(curves, m, 0.5)) r.push_back(e.attack);
    return r;
  };
  CHECK(rank({0.0, 1.0}) == std::vector<std::string>{"stealthy", "base", "never"});
  // c0 = c_f: ranking by total queries.
  CHECK(rank({1.0, 1.0}) == std::vector<std::string>{"base", "stealthy", "never"});
  const auto entries = cost_frontier(curves, {0.0, 1.0}, 0.5);
  CHECK_FALSE(entries.back().cost.has_value());
  CHECK(*entries.front().cost == 40.0);

  // The ranking flips once c0/c_f crosses (200 - 40) / (40000 - 400).
  const double flip = 160.0 / 39600.0;
  for (double r = 1e-5; r <= 1e-1; r *= 1.5) {
    const auto first = rank({r, 1.0}).front();
    CHECK(first == (r < flip ? "stealthy" : "base"));
  }
}

TEST_CASE("cost frontier picks the cheapest qualifying point") {
  std::map<std::string, std::vector<CurvePoint>> curves = {
      {"a", {{10, 2.0, 0, 0, 20}, {50, 0.4, 0, 0, 100}, {80, 0.3, 0, 0, 120}}}};
  const auto e = cost_frontier(curves, {0.0, 1.0}, 0.45);
  CHECK(e[0].budget == 50);
  CHECK(*e[0].cost == 50.0);
  CHECK(e[0].total == 100);
}

TEST_CASE("CSV writers") {
  std::ostringstream curve, cost;
  write_curve_csv(curve, {{"rays", {{1, 0.5, 0.25, 0.75, 3}}}});
  CHECK(curve.str() == "attack,budget,median,q25,q75\nrays,1,0.5,0.25,0.75\n");
  write_cost_csv(cost, {{"rays", {0.001, 1.0}, 244.0}, {"opt", {0.0, 1.0}, std::nullopt}});
  CHECK(cost.str() == "attack,c0,c_flagged,cost_at_target\nrays,0.001,1,244\nopt,0,1,unattained\n");
  const auto b = log_budgets(1000, 4);
  CHECK(b.front() == 1);
  CHECK(b.back() == 1000);
  CHECK(std::is_sorted(b.begin(), b.end()));
  CHECK(std::adjacent_find(b.begin(), b.end()) == b.end());
}

TEST_CASE("trace JSONL round trip and integrity checks") {
  AttackTrace t = make_trace("hsja", {{0, 5, 0.9}, {3, 40, 0.7}, {10, 90, 0.5}});
  t.header.config_digest = fnv1a64_hex("cfg");
  t.header.seed = 42;
  t.header.sample = 3;
  t.summary.x_adv = {0.1 + 1.0 / 3, 0.2};
  t.summary.iterations = 7;
  std::istringstream in(trace_to_jsonl(t));
  const AttackTrace r = trace_from_jsonl(in);
  CHECK(r.events == t.events);
  CHECK(r.summary.ledger == t.summary.ledger);
  CHECK(r.summary.x_adv == t.summary.x_adv);
  CHECK(r.header.seed == 42);
  CHECK(r.header.sample == 3);
  CHECK(r.header.config_digest == t.header.config_digest);
  CHECK(check_trace(r).empty());

  AttackTrace bad = t;
  bad.events[1].d = 0.95;  // distance goes up
  CHECK_FALSE(check_trace(bad).empty());
  bad = t;
  bad.events[2].f = 1;  // counter goes down
  CHECK_FALSE(check_trace(bad).empty());
  bad = t;
  bad.events[0].f = 9;  // flagged above total
  CHECK_FALSE(check_trace(bad).empty());
  bad = t;
  bad.summary.ledger.by_phase[1].total += 1;
  CHECK_FALSE(check_trace(bad).empty());

  std::istringstream junk("{\"type\":\"header\"}\nnot json\n");
  CHECK_THROWS(trace_from_jsonl(junk));
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
}
