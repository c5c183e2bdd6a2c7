#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "stealth/errors.hpp"
#include "stealth/oracle.hpp"

using namespace stealth;

TEST_CASE("linear and sphere verdicts") {
  LinearOracle lin(Vec{1, 0}, -0.5);
  CHECK(lin.decide(Vec{0.9, 0.2}) == Verdict::Flagged);
  CHECK(lin.decide(Vec{0.1, 0.2}) == Verdict::Safe);
  CHECK(lin.decide(Vec{0.5, 0.2}) == Verdict::Flagged);  // w.x + b = 0 is flagged

  SphereOracle sph(Point{0.3, 0.6, 0.5}, 0.2);
  CHECK(sph.decide(sph.center()) == Verdict::Flagged);
  CHECK(sph.decide(Vec{0.3, 0.6, 0.9}) == Verdict::Safe);
  SphereOracle out(Point{0.3, 0.6, 0.5}, 0.2, false);
  CHECK(out.decide(out.center()) == Verdict::Safe);

  CHECK_THROWS_AS(LinearOracle(Vec{0, 0}, 0.0), ParameterError);
  CHECK_THROWS_AS(SphereOracle(Point{0.5}, 0.0), ParameterError);
  CHECK_THROWS_AS(SphereOracle(Point{1.5}, 0.1), ParameterError);
}

TEST_CASE("linear verdict equals the sign of w.x + b") {
  std::mt19937_64 rng(7);
  const Vec w = gaussian_vector(30, rng);
  LinearOracle o(w, -dot(w, Vec(30, 0.5)));
  for (int i = 0; i < 1000; ++i) {
    const Point p = uniform_vector(30, 0.0, 1.0, rng);
    CHECK((o.decide(p) == Verdict::Flagged) == (dot(w, p) + o.bias() >= 0.0));
    CHECK(o.decide(p) == o.decide(p));
  }
}

TEST_CASE("ledger counts") {
  LinearOracle lin(Vec{1, 0}, -0.5);
  InstrumentedOracle io(lin);
  CHECK(io.snapshot() == QueryLedger{});
  for (int i = 0; i < 3; ++i) io.query(Vec{0.1, 0.2}, Phase::StepSize);
  io.query(Vec{0.9, 0.2}, Phase::Init);
  io.query(Vec{0.9, 0.2}, Phase::UpdateDir);
  const QueryLedger l = io.snapshot();
  CHECK(l.total == 5);
  CHECK(l.flagged == 2);
  CHECK(l.safe() == 3);
  CHECK(l.phase(Phase::StepSize).total == 3);
  CHECK(l.phase(Phase::StepSize).flagged == 0);
  CHECK(l.phase(Phase::Init).flagged == 1);
  CHECK(l.consistent());
}

TEST_CASE("ledger invariants under random query sequences") {
  std::mt19937_64 rng(8);
  const auto inst = fixtures::linear_instance(6, 9);
  auto lin = inst.oracle();
  InstrumentedOracle io(lin);
  QueryLedger prev;
  for (int i = 0; i < 2000; ++i) {
    const Phase ph = static_cast<Phase>(rng() % kPhaseCount);
    io.query(uniform_vector(6, 0.0, 1.0, rng), ph);
    const QueryLedger l = io.snapshot();
    CHECK(l.flagged <= l.total);
    CHECK(l.consistent());
    CHECK(l.total == prev.total + 1);
    CHECK(l.flagged >= prev.flagged);
    prev = l;
  }
}

TEST_CASE("contract checks: dimension and grid") {
  LinearOracle plain(Vec{1, 1}, -1.0);
  InstrumentedOracle io(plain);
  CHECK_THROWS_AS(io.query(Vec{0.5}, Phase::Init), DimensionError);
  CHECK(io.snapshot().total == 0);

  LinearOracle q(Vec{1, 1}, -1.0, true, 1.0 / 255);
  InstrumentedOracle iq(q);
  CHECK_THROWS_AS(iq.query(Vec{0.5, 0.5}, Phase::Init), ContractViolation);
  CHECK_NOTHROW(iq.query(Vec{128.0 / 255, 0.0}, Phase::Init));
  const Point a = iq.admissible(Vec{0.5, -3.0});
  CHECK(a == Point{128.0 / 255, 0.0});
}
