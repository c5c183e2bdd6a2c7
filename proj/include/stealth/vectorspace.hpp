#pragma once

// Dense vector helpers shared by every attack. Points live in [0,1]^d.

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace stealth {

using Vec = std::vector<double>;
using Point = Vec;

enum class NormKind { L2, Linf };

const char* to_string(NormKind kind);
NormKind norm_kind_from_string(const std::string& s);

/// Throws DimensionError on an empty vector.
double norm(std::span<const double> v, NormKind kind);
double distance(std::span<const double> a, std::span<const double> b, NormKind kind);
double dot(std::span<const double> a, std::span<const double> b);

Vec add(std::span<const double> a, std::span<const double> b);
Vec sub(std::span<const double> a, std::span<const double> b);
Vec scale(std::span<const double> a, double s);
/// a + s * b
Vec axpy(std::span<const double> a, double s, std::span<const double> b);
/// v / ||v||; throws DimensionError for the zero vector.
Vec normalized(std::span<const double> v, NormKind kind = NormKind::L2);

Point clip_unit(std::span<const double> p);

/// Number of levels for a grid step g, i.e. 1/g; throws ParameterError
/// unless g > 0 and 1/g is (within 1e-6) a positive integer.
long grid_levels(double grid);

/// Rounds each component to the nearest multiple of `grid`; ties go away
/// from zero.
Point quantize(std::span<const double> p, double grid);
bool on_grid(std::span<const double> p, double grid);

Vec gaussian_vector(std::size_t d, std::mt19937_64& rng);
Vec unit_gaussian(std::size_t d, std::mt19937_64& rng);
Vec uniform_vector(std::size_t d, double lo, double hi, std::mt19937_64& rng);
Vec sign_vector(std::span<const double> v);

void check_same_dim(std::span<const double> a, std::span<const double> b);

}  // namespace stealth
