#include "stealth/vectorspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stealth/errors.hpp"

namespace stealth {

const char* to_string(NormKind kind) {
  return kind == NormKind::L2 ? "l2" : "linf";
}

NormKind norm_kind_from_string(const std::string& s) {
  if (s == "l2" || s == "L2") return NormKind::L2;
  if (s == "linf" || s == "Linf" || s == "inf") return NormKind::Linf;
  throw ParameterError("unknown norm '" + s + "' (expected l2 or linf)");
}

void check_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("dimension mismatch: " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
}

double norm(std::span<const double> v, NormKind kind) {
  if (v.empty()) throw DimensionError("norm of an empty vector");
  if (kind == NormKind::Linf) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  // Scaled accumulation keeps tiny and huge components from under/overflowing.
  double scale_ = 0.0, ssq = 1.0;
  for (double x : v) {
    if (x == 0.0) continue;
    const double a = std::abs(x);
    if (scale_ < a) {
      ssq = 1.0 + ssq * (scale_ / a) * (scale_ / a);
      scale_ = a;
    } else {
      ssq += (a / scale_) * (a / scale_);
    }
  }
  return scale_ * std::sqrt(ssq);
}

double distance(std::span<const double> a, std::span<const double> b, NormKind kind) {
  return norm(sub(a, b), kind);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec add(std::span<const double> a, std::span<const double> b) {
  check_same_dim(a, b);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vec sub(std::span<const double> a, std::span<const double> b) {
  check_same_dim(a, b);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vec scale(std::span<const double> a, double s) {
  Vec out(a.begin(), a.end());
  for (double& x : out) x *= s;
  return out;
}

Vec axpy(std::span<const double> a, double s, std::span<const double> b) {
  check_same_dim(a, b);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
  return out;
}

Vec normalized(std::span<const double> v, NormKind kind) {
  const double n = norm(v, kind);
  if (n == 0.0) throw DimensionError("cannot normalize the zero vector");
  return scale(v, 1.0 / n);
}

Point clip_unit(std::span<const double> p) {
  Point out(p.begin(), p.end());
  for (double& x : out) x = std::clamp(x, 0.0, 1.0);
  return out;
}

long grid_levels(double grid) {
  if (!(grid > 0.0) || !std::isfinite(grid)) {
    throw ParameterError("quantization grid must be positive");
  }
  const double inv = 1.0 / grid;
  const double levels = std::round(inv);
  if (levels < 1.0 || std::abs(inv - levels) > 1e-6 * levels) {
    throw ParameterError("quantization grid must divide 1 into an integer number of levels");
  }
  return static_cast<long>(levels);
}

Point quantize(std::span<const double> p, double grid) {
  const double levels = static_cast<double>(grid_levels(grid));
  Point out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    // std::round rounds half away from zero.
    out[i] = std::round(p[i] * levels) / levels;
  }
  return out;
}

bool on_grid(std::span<const double> p, double grid) {
  const double levels = static_cast<double>(grid_levels(grid));
  for (double x : p) {
    const double s = x * levels;
    if (std::abs(s - std::round(s)) > 1e-7) return false;
  }
  return true;
}

Vec gaussian_vector(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vec v(d);
  for (double& x : v) x = n01(rng);
  return v;
}

Vec unit_gaussian(std::size_t d, std::mt19937_64& rng) {
  for (;;) {
    Vec v = gaussian_vector(d, rng);
    const double n = norm(v, NormKind::L2);
    if (n > 0.0) return scale(v, 1.0 / n);
  }
}

Vec uniform_vector(std::size_t d, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(d);
  for (double& x : v) x = u(rng);
  return v;
}

Vec sign_vector(std::span<const double> v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] < 0.0 ? -1.0 : 1.0;
  return out;
}

}  // namespace stealth
