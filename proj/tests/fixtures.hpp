#pragma once

// Shared synthetic instances for the tests and the acceptance binary.

#include <cstdint>
#include <random>

#include "stealth/oracle.hpp"

namespace fixtures {

using stealth::Point;
using stealth::Vec;

// Linear oracle whose flagged region is the far side of a hyperplane at
// L2 distance r0 from x. x sits away from the cube center so the center
// region, and uniform noise, is safe.
struct LinearInstance {
  Vec w;
  double b = 0.0;
  Point x;

  stealth::LinearOracle oracle() const { return stealth::LinearOracle(w, b); }
  // Exact L2 distance from x to the hyperplane (ignoring the cube).
  double l2_gap() const { return (stealth::dot(w, x) + b) / stealth::norm(w, stealth::NormKind::L2); }
};

inline LinearInstance linear_instance(std::size_t d, std::uint64_t seed, double r0 = 0.2) {
  std::mt19937_64 rng(seed);
  LinearInstance in;
  in.w = stealth::gaussian_vector(d, rng);
  const double wn = stealth::norm(in.w, stealth::NormKind::L2);
  const Vec what = stealth::scale(in.w, 1.0 / wn);
  in.x = stealth::clip_unit(
      stealth::axpy(stealth::axpy(Point(d, 0.5), 2.0, what), 0.1, stealth::gaussian_vector(d, rng)));
  in.b = -stealth::dot(in.w, in.x) + r0 * wn;
  return in;
}

// Counts queries and keeps every point, forwarding to an inner oracle.
class RecordingOracle final : public stealth::DecisionOracle {
 public:
  explicit RecordingOracle(stealth::DecisionOracle& inner) : inner_(inner) {}
  stealth::Verdict decide(std::span<const double> p) override {
    points.emplace_back(p.begin(), p.end());
    verdicts.push_back(inner_.decide(p));
    return verdicts.back();
  }
  stealth::OracleDescriptor descriptor() const override { return inner_.descriptor(); }

  std::vector<Point> points;
  std::vector<stealth::Verdict> verdicts;

 private:
  stealth::DecisionOracle& inner_;
};

}  // namespace fixtures
