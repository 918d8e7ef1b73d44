#ifndef FIXPROX_SOLVERS_HPP
#define FIXPROX_SOLVERS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fixprox/errors.hpp"
#include "fixprox/functions.hpp"
#include "fixprox/operators.hpp"
#include "fixprox/schedules.hpp"
#include "fixprox/vecspace.hpp"

namespace fixprox {

/// One user's private data: objective, firmly nonexpansive operator, Halpern
/// anchor (may be empty when the Halpern method is not used) and an optional
/// bounded set the user projects its output onto.
struct UserProblem {
  ProximableFunction f;
  NonexpansiveOperator T;
  Vector anchor;
  std::optional<ClosedConvexSet> bounding;
};

class NetworkProblem {
 public:
  explicit NetworkProblem(std::vector<UserProblem> users) : users_(std::move(users)) {
    if (users_.empty()) throw UsageError("NetworkProblem: needs at least one user");
    dim_ = fixprox::dim(users_.front().f);
    for (const auto& u : users_) {
      detail::require_same_dim(dim_, fixprox::dim(u.f), "NetworkProblem objective");
      if (const auto d = u.T.dim()) detail::require_same_dim(dim_, *d, "NetworkProblem operator");
      if (!u.anchor.empty()) detail::require_same_dim(dim_, u.anchor.dim(), "NetworkProblem anchor");
      if (u.bounding) {
        detail::require_same_dim(dim_, fixprox::dim(*u.bounding), "NetworkProblem bounding set");
      }
    }
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return users_.size(); }
  const std::vector<UserProblem>& users() const noexcept { return users_; }
  const UserProblem& operator[](std::size_t i) const { return users_[i]; }

  double objective(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& u : users_) s += evaluate(u.f, x);
    return s;
  }

  double objective(const Vector& x) const { return objective(x.coords()); }

  /// sum_i ||x - T_i(x)||
  double residual_sum(std::span<const double> x) const {
    std::vector<double> tx(x.size());
    double s = 0.0;
    for (const auto& u : users_) {
      detail::apply_unchecked(u.T, x, tx);
      s += std::sqrt(detail::squared_distance(x, tx));
    }
    return s;
  }

  double residual_sum(const Vector& x) const { return residual_sum(x.coords()); }

 private:
  std::vector<UserProblem> users_;
  std::size_t dim_ = 0;
};

enum class Algorithm { halpern, km, ism, psm };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::halpern: return "halpern";
    case Algorithm::km: return "km";
    case Algorithm::ism: return "ism";
    case Algorithm::psm: return "psm";
  }
  return "unknown";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "halpern") return Algorithm::halpern;
  if (s == "km") return Algorithm::km;
  if (s == "ism") return Algorithm::ism;
  if (s == "psm") return Algorithm::psm;
  throw UsageError("unknown algorithm '" + std::string(s) + "' (expected halpern, km, ism or psm)");
}

struct FixedOrder {};

/// Users visited in a fresh random order at every outer iteration.
struct ShuffledPerIteration {
  std::uint64_t seed = 0;
};

using UserOrder = std::variant<FixedOrder, ShuffledPerIteration>;

struct SolverOptions {
  std::size_t max_iters = 1000;
  bool record_trace = false;
  /// Record the per-iteration inequality gaps against reference_point.
  bool monitor_inequalities = false;
  std::optional<Vector> reference_point;
  UserOrder user_order = FixedOrder{};
  /// Test hook: skip schedule validation so degenerate sequences
  /// (alpha = 0, alpha = 1, gamma = 0) can be driven through the solvers.
  bool unchecked_schedules = false;
};

/// Gaps of the per-iteration inequalities; a gap <= 0 (up to rounding) means
/// the inequality holds.
struct MonitorRecord {
  std::size_t iteration = 0;
  /// Worst three-point prox inequality gap over the users of this sweep.
  double prox_gap = -std::numeric_limits<double>::infinity();
  /// Outer-iteration descent inequality gap (KM-type method only, NaN otherwise).
  double descent_gap = std::numeric_limits<double>::quiet_NaN();
};

struct RunTrace {
  /// Outer iterates x_0..x_max, only filled when record_trace is set.
  std::vector<Vector> iterates;
  /// sum_i f_i(x_n), n = 0..max_iters
  std::vector<double> objective;
  /// sum_i ||x_n - T_i(x_n)||, n = 0..max_iters
  std::vector<double> residual;
  /// Wall time of the update producing x_n; time_s[0] = 0.
  std::vector<double> time_s;
  std::vector<MonitorRecord> monitors;
  Vector final_iterate;
};

namespace detail {

struct SweepBuffers {
  explicit SweepBuffers(std::size_t n) : y(n), ty(n), next(n) {}
  std::vector<double> y, ty, next;
};

struct MonitorState {
  const Vector* z = nullptr;
  double worst_prox_gap = -std::numeric_limits<double>::infinity();
  double sweep_sum = 0.0;      // sum_i ||x^(i-1) - y^(i)||^2 + ||y^(i) - T(y^(i))||^2
  double value_gap_sum = 0.0;  // sum_i f_i(z) - f_i(y^(i))
};

inline void require_finite(std::span<const double> x, std::size_t n) {
  for (double v : x) {
    if (!std::isfinite(v)) throw NumericFailure("non-finite iterate", n);
  }
}

/// One user update of the incremental methods; `cur` is x^(i-1) on entry
/// and x^(i) on exit.
inline void incremental_step(Algorithm algo, const UserProblem& u, double gamma, double alpha,
                             std::vector<double>& cur, SweepBuffers& buf, MonitorState* mon) {
  const std::size_t n = cur.size();
  if (algo == Algorithm::ism) {
    subgradient_into(u.f, cur, buf.y);
    for (std::size_t j = 0; j < n; ++j) buf.y[j] = cur[j] - gamma * buf.y[j];
  } else {
    prox_into(u.f, gamma, cur, buf.y);
  }
  apply_unchecked(u.T, buf.y, buf.ty);

  if (mon != nullptr) {
    const auto z = mon->z->coords();
    const double f_z = evaluate(u.f, z);
    const double f_y = evaluate(u.f, std::span<const double>(buf.y));
    const double step_sq = squared_distance(cur, buf.y);
    const double gap = squared_distance(buf.y, z) - squared_distance(cur, z) + step_sq -
                       2.0 * gamma * (f_z - f_y);
    mon->worst_prox_gap = std::max(mon->worst_prox_gap, gap);
    mon->sweep_sum += step_sq + squared_distance(buf.y, buf.ty);
    mon->value_gap_sum += f_z - f_y;
  }

  const std::span<const double> base =
      algo == Algorithm::halpern ? u.anchor.coords() : std::span<const double>(cur);
  const double keep = 1.0 - alpha;
  for (std::size_t j = 0; j < n; ++j) buf.next[j] = alpha * base[j] + keep * buf.ty[j];
  if (u.bounding) {
    std::visit([&](const auto& s) { s.project_into(buf.next, buf.next); }, *u.bounding);
  }
  cur.swap(buf.next);
}

/// x_{n+1} = mean_i [ t x + (1 - t) T_i(x - gamma g_i) ]. Each coordinate of
/// the mean is summed over the sorted user contributions, so the result does
/// not depend on the order of the users.
inline void parallel_step(const NetworkProblem& p, double gamma, double alpha,
                          std::vector<double>& cur, SweepBuffers& buf,
                          std::vector<double>& contributions) {
  const std::size_t n = cur.size();
  const std::size_t users = p.size();
  contributions.resize(users * n);
  const double keep = 1.0 - alpha;
  for (std::size_t i = 0; i < users; ++i) {
    const auto& u = p[i];
    subgradient_into(u.f, cur, buf.y);
    for (std::size_t j = 0; j < n; ++j) buf.y[j] = cur[j] - gamma * buf.y[j];
    apply_unchecked(u.T, buf.y, buf.ty);
    for (std::size_t j = 0; j < n; ++j) buf.next[j] = alpha * cur[j] + keep * buf.ty[j];
    if (u.bounding) {
      std::visit([&](const auto& s) { s.project_into(buf.next, buf.next); }, *u.bounding);
    }
    for (std::size_t j = 0; j < n; ++j) contributions[j * users + i] = buf.next[j];
  }
  for (std::size_t j = 0; j < n; ++j) {
    auto first = contributions.begin() + static_cast<std::ptrdiff_t>(j * users);
    std::sort(first, first + static_cast<std::ptrdiff_t>(users));
    const double pivot = *first;
    double s = 0.0;
    for (std::size_t i = 1; i < users; ++i) s += contributions[j * users + i] - pivot;
    cur[j] = pivot + s / static_cast<double>(users);
  }
}

inline RunTrace run_unvalidated(const NetworkProblem& p, Algorithm algo, const PowerLaw& gamma,
                                const StepSequence& alpha, const Vector& x0,
                                const SolverOptions& opts) {
  using Clock = std::chrono::steady_clock;
  const std::size_t dim = p.dim();
  require_same_dim(dim, x0.dim(), "solver initial point");
  if (opts.max_iters < 1) throw UsageError("max_iters must be at least 1");
  if (algo == Algorithm::halpern) {
    for (const auto& u : p.users()) {
      if (u.anchor.empty()) throw UsageError("halpern: every user needs an anchor");
    }
  }
  const bool monitored = opts.monitor_inequalities &&
                         (algo == Algorithm::halpern || algo == Algorithm::km);
  if (monitored) {
    if (!opts.reference_point) throw UsageError("monitors need a reference point");
    require_same_dim(dim, opts.reference_point->dim(), "monitor reference point");
  }

  RunTrace trace;
  const std::size_t len = opts.max_iters + 1;
  trace.objective.reserve(len);
  trace.residual.reserve(len);
  trace.time_s.reserve(len);
  if (opts.record_trace) trace.iterates.reserve(len);

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> prev;
  SweepBuffers buf(dim);
  std::vector<double> contributions;
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::optional<RandomSource> shuffler;
  if (const auto* s = std::get_if<ShuffledPerIteration>(&opts.user_order)) shuffler.emplace(s->seed);

  auto record = [&](double seconds) {
    trace.objective.push_back(p.objective(x));
    trace.residual.push_back(p.residual_sum(x));
    trace.time_s.push_back(seconds);
    if (opts.record_trace) trace.iterates.emplace_back(x);
  };
  record(0.0);

  for (std::size_t n = 0; n < opts.max_iters; ++n) {
    const auto idx = static_cast<std::int64_t>(n);
    const double g = value_at(gamma, idx);
    const double a = value_at(alpha, idx);
    MonitorState mon;
    if (monitored) {
      mon.z = &*opts.reference_point;
      prev = x;
    }

    const auto start = Clock::now();
    if (algo == Algorithm::psm) {
      parallel_step(p, g, a, x, buf, contributions);
    } else {
      if (shuffler) std::shuffle(order.begin(), order.end(), shuffler->engine());
      for (std::size_t i : order) {
        incremental_step(algo, p[i], g, a, x, buf, monitored ? &mon : nullptr);
      }
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    require_finite(x, n);

    if (monitored) {
      MonitorRecord rec;
      rec.iteration = n;
      rec.prox_gap = mon.worst_prox_gap;
      if (algo == Algorithm::km) {
        const auto z = mon.z->coords();
        rec.descent_gap = squared_distance(x, z) - squared_distance(prev, z) +
                          (1.0 - a) * mon.sweep_sum - 2.0 * (1.0 - a) * g * mon.value_gap_sum;
      }
      trace.monitors.push_back(rec);
    }
    record(elapsed);
  }
  trace.final_iterate = Vector(std::move(x));
  return trace;
}

inline void require_valid(const ValidationResult& r, std::string_view what) {
  if (!r) throw UsageError(std::string(what) + ": schedule rejected: " + r.summary());
}

}  // namespace detail

/// Halpern-type incremental proximal method:
///   x^(i) = P_X[ alpha_n anchor_i + (1 - alpha_n) T_i(Prox_{gamma_n f_i}(x^(i-1))) ]
/// where P_X is skipped for users without a bounding set.
inline RunTrace run_halpern(const NetworkProblem& p, const PowerLaw& gamma, const PowerLaw& alpha,
                            const Vector& x0, const SolverOptions& opts = {}) {
  if (!opts.unchecked_schedules) detail::require_valid(validate_halpern(gamma, alpha), "halpern");
  return detail::run_unvalidated(p, Algorithm::halpern, gamma, alpha, x0, opts);
}

/// KM-type incremental proximal method:
///   x^(i) = P_X[ t x^(i-1) + (1 - t) T_i(Prox_{gamma_n f_i}(x^(i-1))) ]
inline RunTrace run_km(const NetworkProblem& p, const PowerLaw& gamma, const Constant& alpha,
                       const Vector& x0, const SolverOptions& opts = {}) {
  if (!opts.unchecked_schedules) detail::require_valid(validate_km(gamma, alpha), "km");
  return detail::run_unvalidated(p, Algorithm::km, gamma, alpha, x0, opts);
}

/// Incremental subgradient method: the KM-type sweep with the prox replaced
/// by the subgradient step x^(i-1) - gamma_n g_i.
inline RunTrace run_ism(const NetworkProblem& p, const PowerLaw& gamma, const Constant& alpha,
                        const Vector& x0, const SolverOptions& opts = {}) {
  if (!opts.unchecked_schedules) detail::require_valid(validate_km(gamma, alpha), "ism");
  return detail::run_unvalidated(p, Algorithm::ism, gamma, alpha, x0, opts);
}

/// Parallel subgradient method: every user reads x_n and the outputs are
/// averaged.
inline RunTrace run_psm(const NetworkProblem& p, const PowerLaw& gamma, const Constant& alpha,
                        const Vector& x0, const SolverOptions& opts = {}) {
  if (!opts.unchecked_schedules) detail::require_valid(validate_km(gamma, alpha), "psm");
  return detail::run_unvalidated(p, Algorithm::psm, gamma, alpha, x0, opts);
}

/// Dispatches on the algorithm id. Halpern needs a power-law alpha, the
/// others a constant.
inline RunTrace run_algorithm(Algorithm algo, const NetworkProblem& p, const PowerLaw& gamma,
                              const StepSequence& alpha, const Vector& x0,
                              const SolverOptions& opts = {}) {
  if (algo == Algorithm::halpern) {
    const auto* a = std::get_if<PowerLaw>(&alpha);
    if (a == nullptr) throw UsageError("halpern needs a power-law alpha");
    return run_halpern(p, gamma, *a, x0, opts);
  }
  const auto* t = std::get_if<Constant>(&alpha);
  if (t == nullptr) throw UsageError(std::string(to_string(algo)) + " needs a constant alpha");
  switch (algo) {
    case Algorithm::km: return run_km(p, gamma, *t, x0, opts);
    case Algorithm::ism: return run_ism(p, gamma, *t, x0, opts);
    default: return run_psm(p, gamma, *t, x0, opts);
  }
}

}  // namespace fixprox

#endif  // FIXPROX_SOLVERS_HPP
