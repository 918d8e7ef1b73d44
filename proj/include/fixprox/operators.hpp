#ifndef FIXPROX_OPERATORS_HPP
#define FIXPROX_OPERATORS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "fixprox/errors.hpp"
#include "fixprox/vecspace.hpp"

namespace fixprox {

/// Tolerance used when asking whether a point belongs to a set.
inline constexpr double kMembershipTolerance = 1e-9;

class Ball {
 public:
  Ball(Vector center, double radius) : center_(std::move(center)), radius_(radius) {
    if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
      throw UsageError("Ball: radius must be positive and finite");
    }
  }

  static Ball unit(std::size_t dim) { return Ball(Vector(dim), 1.0); }

  const Vector& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  std::size_t dim() const noexcept { return center_.dim(); }

  // out may alias x.
  void project_into(std::span<const double> x, std::span<double> out) const noexcept {
    const double dist = std::sqrt(detail::squared_distance(x, center_.coords()));
    if (dist <= radius_) {
      if (out.data() != x.data()) std::copy(x.begin(), x.end(), out.begin());
      return;
    }
    const double s = radius_ / dist;
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = center_[j] + s * (x[j] - center_[j]);
  }

  bool contains(std::span<const double> x, double tol) const noexcept {
    return std::sqrt(detail::squared_distance(x, center_.coords())) <= radius_ + tol;
  }

  friend bool operator==(const Ball&, const Ball&) = default;

 private:
  Vector center_;
  double radius_;
};

/// {x : <normal, x> <= offset}
class HalfSpace {
 public:
  HalfSpace(Vector normal, double offset)
      : normal_(std::move(normal)), offset_(offset), normal_sq_(squared_norm(normal_)) {
    if (!(normal_sq_ > 0.0)) throw UsageError("HalfSpace: normal must be nonzero");
    if (!std::isfinite(offset_)) throw UsageError("HalfSpace: offset must be finite");
  }

  const Vector& normal() const noexcept { return normal_; }
  double offset() const noexcept { return offset_; }
  std::size_t dim() const noexcept { return normal_.dim(); }

  // out may alias x.
  void project_into(std::span<const double> x, std::span<double> out) const noexcept {
    const double excess = detail::dot(normal_.coords(), x) - offset_;
    if (excess <= 0.0) {
      if (out.data() != x.data()) std::copy(x.begin(), x.end(), out.begin());
      return;
    }
    const double s = excess / normal_sq_;
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] - s * normal_[j];
  }

  bool contains(std::span<const double> x, double tol) const noexcept {
    return detail::dot(normal_.coords(), x) <= offset_ + tol;
  }

  friend bool operator==(const HalfSpace& a, const HalfSpace& b) {
    return a.normal_ == b.normal_ && a.offset_ == b.offset_;
  }

 private:
  Vector normal_;
  double offset_;
  double normal_sq_;
};

using ClosedConvexSet = std::variant<Ball, HalfSpace>;

inline std::size_t dim(const ClosedConvexSet& set) {
  return std::visit([](const auto& s) { return s.dim(); }, set);
}

inline void project_into(const ClosedConvexSet& set, std::span<const double> x,
                         std::span<double> out) {
  detail::require_same_dim(dim(set), x.size(), "project");
  std::visit([&](const auto& s) { s.project_into(x, out); }, set);
}

/// Metric projection onto the set.
inline Vector project(const ClosedConvexSet& set, const Vector& x) {
  Vector out(x.dim());
  project_into(set, x.coords(), out.coords());
  return out;
}

inline bool contains(const ClosedConvexSet& set, const Vector& x,
                     double tol = kMembershipTolerance) {
  detail::require_same_dim(dim(set), x.dim(), "contains");
  return std::visit([&](const auto& s) { return s.contains(x.coords(), tol); }, set);
}

class NonexpansiveOperator;

struct IdentityOp {};

struct ProjectionOp {
  ClosedConvexSet set;
};

struct WeightedAverageOp {
  std::vector<NonexpansiveOperator> terms;
  std::vector<double> weights;
};

/// outer(inner(x))
struct ComposeOp {
  std::shared_ptr<const NonexpansiveOperator> outer;
  std::shared_ptr<const NonexpansiveOperator> inner;
};

/// (x + inner(x)) / 2
struct HalfAveragedOp {
  std::shared_ptr<const NonexpansiveOperator> inner;
};

/// Immutable operator tree. Build through the static factories, which
/// enforce the structural invariants (positive weights summing to one,
/// consistent dimensions).
class NonexpansiveOperator {
 public:
  using Node = std::variant<IdentityOp, ProjectionOp, WeightedAverageOp, ComposeOp, HalfAveragedOp>;

  static NonexpansiveOperator identity() { return NonexpansiveOperator(IdentityOp{}); }

  static NonexpansiveOperator projection(ClosedConvexSet set) {
    return NonexpansiveOperator(ProjectionOp{std::move(set)});
  }

  static NonexpansiveOperator weighted_average(std::vector<NonexpansiveOperator> terms,
                                               std::vector<double> weights) {
    if (terms.empty()) throw UsageError("weighted_average: no terms");
    if (terms.size() != weights.size()) {
      throw UsageError("weighted_average: terms and weights differ in length");
    }
    double sum = 0.0;
    for (double w : weights) {
      if (!(w > 0.0)) throw UsageError("weighted_average: weights must be strictly positive");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw UsageError("weighted_average: weights must sum to 1");
    std::optional<std::size_t> d;
    for (const auto& t : terms) d = merge_dim(d, t.dim());
    return NonexpansiveOperator(WeightedAverageOp{std::move(terms), std::move(weights)}, d);
  }

  static NonexpansiveOperator compose(NonexpansiveOperator outer, NonexpansiveOperator inner) {
    const auto d = merge_dim(outer.dim(), inner.dim());
    return NonexpansiveOperator(
        ComposeOp{std::make_shared<const NonexpansiveOperator>(std::move(outer)),
                  std::make_shared<const NonexpansiveOperator>(std::move(inner))},
        d);
  }

  static NonexpansiveOperator half_averaged(NonexpansiveOperator inner) {
    const auto d = inner.dim();
    return NonexpansiveOperator(
        HalfAveragedOp{std::make_shared<const NonexpansiveOperator>(std::move(inner))}, d);
  }

  const Node& node() const noexcept { return node_; }

  /// Ambient dimension, or nullopt for dimension-agnostic trees (Identity).
  std::optional<std::size_t> dim() const noexcept { return dim_; }

 private:
  explicit NonexpansiveOperator(Node node, std::optional<std::size_t> d = std::nullopt)
      : node_(std::move(node)), dim_(d) {
    if (const auto* p = std::get_if<ProjectionOp>(&node_)) dim_ = fixprox::dim(p->set);
  }

  static std::optional<std::size_t> merge_dim(std::optional<std::size_t> a,
                                              std::optional<std::size_t> b) {
    if (a && b && *a != *b) throw UsageError("operator: inconsistent dimensions");
    return a ? a : b;
  }

  Node node_;
  std::optional<std::size_t> dim_;
};

namespace detail {

// out must not alias x.
inline void apply_unchecked(const NonexpansiveOperator& op, std::span<const double> x,
                            std::span<double> out) {
  struct Visitor {
    std::span<const double> x;
    std::span<double> out;

    void operator()(const IdentityOp&) const { std::copy(x.begin(), x.end(), out.begin()); }

    void operator()(const ProjectionOp& p) const {
      std::visit([&](const auto& s) { s.project_into(x, out); }, p.set);
    }

    void operator()(const WeightedAverageOp& w) const {
      std::vector<double> term(x.size());
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t k = 0; k < w.terms.size(); ++k) {
        apply_unchecked(w.terms[k], x, term);
        const double wk = w.weights[k];
        for (std::size_t j = 0; j < x.size(); ++j) out[j] += wk * term[j];
      }
    }

    void operator()(const ComposeOp& c) const {
      std::vector<double> mid(x.size());
      apply_unchecked(*c.inner, x, mid);
      apply_unchecked(*c.outer, mid, out);
    }

    void operator()(const HalfAveragedOp& h) const {
      apply_unchecked(*h.inner, x, out);
      for (std::size_t j = 0; j < x.size(); ++j) out[j] = 0.5 * (x[j] + out[j]);
    }
  };
  std::visit(Visitor{x, out}, op.node());
}

}  // namespace detail

/// Writes op(x) into out; out must not alias x.
inline void apply_into(const NonexpansiveOperator& op, std::span<const double> x,
                       std::span<double> out) {
  if (const auto d = op.dim()) detail::require_same_dim(*d, x.size(), "apply");
  detail::require_same_dim(x.size(), out.size(), "apply");
  detail::apply_unchecked(op, x, out);
}

inline Vector apply(const NonexpansiveOperator& op, const Vector& x) {
  Vector out(x.dim());
  apply_into(op, x.coords(), out.coords());
  return out;
}

/// ||x - op(x)||
inline double residual(const NonexpansiveOperator& op, std::span<const double> x) {
  std::vector<double> tx(x.size());
  apply_into(op, x, tx);
  return std::sqrt(detail::squared_distance(x, tx));
}

inline double residual(const NonexpansiveOperator& op, const Vector& x) {
  return residual(op, x.coords());
}

/// Builds (Id + P_bounding o sum_k w_k P_{C_k}) / 2, whose fixed point set is
/// the set of minimizers over `bounding` of the weighted mean-square distance
/// to the C_k. That equals bounding ∩ (∩_k C_k) whenever the intersection is
/// nonempty.
inline NonexpansiveOperator make_gcfs_operator(const ClosedConvexSet& bounding,
                                               const std::vector<ClosedConvexSet>& sets,
                                               const std::vector<double>& weights) {
  std::vector<NonexpansiveOperator> terms;
  terms.reserve(sets.size());
  for (const auto& s : sets) terms.push_back(NonexpansiveOperator::projection(s));
  auto average = NonexpansiveOperator::weighted_average(std::move(terms), weights);
  return NonexpansiveOperator::half_averaged(NonexpansiveOperator::compose(
      NonexpansiveOperator::projection(bounding), std::move(average)));
}

}  // namespace fixprox

#endif  // FIXPROX_OPERATORS_HPP
