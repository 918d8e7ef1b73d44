#ifndef FIXPROX_FUNCTIONS_HPP
#define FIXPROX_FUNCTIONS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <variant>

#include "fixprox/errors.hpp"
#include "fixprox/vecspace.hpp"

namespace fixprox {

/// f(x) = sum_j w_j |x_j - a_j| with all w_j > 0.
class WeightedShiftedL1 {
 public:
  WeightedShiftedL1(Vector weights, Vector shifts)
      : weights_(std::move(weights)), shifts_(std::move(shifts)) {
    detail::require_same_dim(weights_.dim(), shifts_.dim(), "WeightedShiftedL1");
    if (weights_.dim() == 0) throw UsageError("WeightedShiftedL1: empty parameters");
    for (double w : weights_) {
      if (!(w > 0.0)) throw UsageError("WeightedShiftedL1: weights must be strictly positive");
    }
  }

  const Vector& weights() const noexcept { return weights_; }
  const Vector& shifts() const noexcept { return shifts_; }
  std::size_t dim() const noexcept { return weights_.dim(); }

  double evaluate(std::span<const double> x) const noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += weights_[j] * std::abs(x[j] - shifts_[j]);
    return s;
  }

  // Soft thresholding around the shift: p_j = a_j + soft(x_j - a_j, gamma w_j).
  void prox_into(double gamma, std::span<const double> x, std::span<double> out) const noexcept {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double v = x[j] - shifts_[j];
      const double t = gamma * weights_[j];
      double shrunk = 0.0;
      if (v > t) {
        shrunk = v - t;
      } else if (v < -t) {
        shrunk = v + t;
      }
      out[j] = shifts_[j] + shrunk;
    }
  }

  // Zero at kinks: the minimal-norm element of the subdifferential.
  void subgradient_into(std::span<const double> x, std::span<double> out) const noexcept {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double v = x[j] - shifts_[j];
      out[j] = v > 0.0 ? weights_[j] : (v < 0.0 ? -weights_[j] : 0.0);
    }
  }

  friend bool operator==(const WeightedShiftedL1&, const WeightedShiftedL1&) = default;

 private:
  Vector weights_;
  Vector shifts_;
};

/// Closed set of supported proximable families. Add alternatives here.
using ProximableFunction = std::variant<WeightedShiftedL1>;

inline std::size_t dim(const ProximableFunction& f) {
  return std::visit([](const auto& g) { return g.dim(); }, f);
}

inline double evaluate(const ProximableFunction& f, std::span<const double> x) {
  detail::require_same_dim(dim(f), x.size(), "evaluate");
  return std::visit([&](const auto& g) { return g.evaluate(x); }, f);
}

inline double evaluate(const ProximableFunction& f, const Vector& x) {
  return evaluate(f, x.coords());
}

/// Writes Prox_{gamma f}(x) into out. gamma == 0 is the identity.
inline void prox_into(const ProximableFunction& f, double gamma, std::span<const double> x,
                      std::span<double> out) {
  if (!(gamma >= 0.0)) throw UsageError("prox: gamma must be nonnegative");
  detail::require_same_dim(dim(f), x.size(), "prox");
  if (gamma == 0.0) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  std::visit([&](const auto& g) { g.prox_into(gamma, x, out); }, f);
}

inline Vector prox(const ProximableFunction& f, double gamma, const Vector& x) {
  Vector out(x.dim());
  prox_into(f, gamma, x.coords(), out.coords());
  return out;
}

inline void subgradient_into(const ProximableFunction& f, std::span<const double> x,
                             std::span<double> out) {
  detail::require_same_dim(dim(f), x.size(), "subgradient");
  std::visit([&](const auto& g) { g.subgradient_into(x, out); }, f);
}

inline Vector subgradient(const ProximableFunction& f, const Vector& x) {
  Vector out(x.dim());
  subgradient_into(f, x.coords(), out.coords());
  return out;
}

}  // namespace fixprox

#endif  // FIXPROX_FUNCTIONS_HPP
