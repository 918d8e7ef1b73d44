#ifndef FIXPROX_VECSPACE_HPP
#define FIXPROX_VECSPACE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fixprox/errors.hpp"

namespace fixprox {

/// Dense real coordinate vector. Coordinates are required to be finite.
class Vector {
 public:
  Vector() = default;

  explicit Vector(std::size_t dim, double fill = 0.0) : coords_(dim, fill) {
    require_finite();
  }

  Vector(std::initializer_list<double> coords) : coords_(coords) { require_finite(); }

  explicit Vector(std::vector<double> coords) : coords_(std::move(coords)) {
    require_finite();
  }

  std::size_t dim() const noexcept { return coords_.size(); }
  bool empty() const noexcept { return coords_.empty(); }

  double operator[](std::size_t j) const { return coords_[j]; }
  double& operator[](std::size_t j) { return coords_[j]; }

  std::span<const double> coords() const noexcept { return coords_; }
  std::span<double> coords() noexcept { return coords_; }
  const std::vector<double>& data() const noexcept { return coords_; }

  auto begin() const noexcept { return coords_.begin(); }
  auto end() const noexcept { return coords_.end(); }

  bool all_finite() const noexcept {
    for (double v : coords_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  void require_finite() const {
    if (!all_finite()) throw UsageError("vector has a non-finite coordinate");
  }

  std::vector<double> coords_;
};

namespace detail {

inline void require_same_dim(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw UsageError(std::string(where) + ": dimension mismatch (" + std::to_string(a) +
                     " vs " + std::to_string(b) + ")");
  }
}

inline double dot(std::span<const double> x, std::span<const double> y) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * y[j];
  return s;
}

inline double squared_distance(std::span<const double> x, std::span<const double> y) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - y[j];
    s += d * d;
  }
  return s;
}

}  // namespace detail

inline double dot(const Vector& x, const Vector& y) {
  detail::require_same_dim(x.dim(), y.dim(), "dot");
  return detail::dot(x.coords(), y.coords());
}

inline double squared_norm(const Vector& x) { return detail::dot(x.coords(), x.coords()); }

inline double norm(const Vector& x) { return std::sqrt(squared_norm(x)); }

inline double distance(const Vector& x, const Vector& y) {
  detail::require_same_dim(x.dim(), y.dim(), "distance");
  return std::sqrt(detail::squared_distance(x.coords(), y.coords()));
}

/// alpha * x + y
inline Vector axpy(double alpha, const Vector& x, const Vector& y) {
  detail::require_same_dim(x.dim(), y.dim(), "axpy");
  Vector out = y;
  for (std::size_t j = 0; j < x.dim(); ++j) out[j] += alpha * x[j];
  return out;
}

/// x - y
inline Vector subtract(const Vector& x, const Vector& y) { return axpy(-1.0, y, x); }

inline Vector scale(double alpha, const Vector& x) {
  Vector out = x;
  for (double& v : out.coords()) v *= alpha;
  return out;
}

/// Seedable generator with deterministic child derivation.
///
/// Children are keyed by (root seed, label, index) only, so the stream a
/// child produces does not depend on how many draws the parent has made.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  RandomSource derive(std::string_view label, std::uint64_t index = 0) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : label) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return RandomSource(mix(mix(seed_ ^ h) + index));
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

inline Vector sample_uniform(RandomSource& rng, std::size_t dim, double lo, double hi) {
  if (!(lo < hi)) throw UsageError("sample_uniform: requires lo < hi");
  if (dim == 0) throw UsageError("sample_uniform: dim must be positive");
  std::vector<double> coords(dim);
  for (double& v : coords) v = rng.uniform(lo, hi);
  return Vector(std::move(coords));
}

}  // namespace fixprox

#endif  // FIXPROX_VECSPACE_HPP
