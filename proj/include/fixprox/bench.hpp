#ifndef FIXPROX_BENCH_HPP
#define FIXPROX_BENCH_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fixprox/errors.hpp"
#include "fixprox/functions.hpp"
#include "fixprox/operators.hpp"
#include "fixprox/schedules.hpp"
#include "fixprox/solvers.hpp"
#include "fixprox/vecspace.hpp"

namespace fixprox {

/// Feasible: every user's sets share the origin with the unit ball.
/// Infeasible: each half-space misses the unit ball, all users share one
/// operator so the common fixed point set is still nonempty.
enum class Regime { feasible, infeasible };

inline std::string_view to_string(Regime r) {
  return r == Regime::feasible ? "feasible" : "infeasible";
}

inline Regime parse_regime(std::string_view s) {
  if (s == "feasible") return Regime::feasible;
  if (s == "infeasible") return Regime::infeasible;
  throw UsageError("unknown regime '" + std::string(s) + "' (expected feasible or infeasible)");
}

/// An algorithm together with one step-size variant.
struct AlgorithmVariant {
  Algorithm algorithm = Algorithm::km;
  std::string variant;
  PowerLaw gamma;
  StepSequence alpha;

  std::string label() const { return std::string(to_string(algorithm)) + "(" + variant + ")"; }
};

inline constexpr double kStepScale = 1e-3;
inline constexpr double kKmRelaxation = 0.5;
inline constexpr double kWeightFloor = 1e-6;

/// Variant (i): gamma exponent 1/4, Halpern alpha exponent 1/2.
/// Variant (ii): gamma exponent 1/8, Halpern alpha exponent 3/4.
/// The other methods use the constant relaxation t = 1/2.
inline AlgorithmVariant standard_variant(Algorithm algo, std::string_view variant) {
  double a = 0.0;
  double b = 0.0;
  if (variant == "i") {
    a = 0.25;
    b = 0.5;
  } else if (variant == "ii") {
    a = 0.125;
    b = 0.75;
  } else {
    throw UsageError("unknown variant '" + std::string(variant) + "' (expected i or ii)");
  }
  AlgorithmVariant v;
  v.algorithm = algo;
  v.variant = std::string(variant);
  v.gamma = PowerLaw{kStepScale, a};
  if (algo == Algorithm::halpern) {
    v.alpha = PowerLaw{kStepScale, b};
  } else {
    v.alpha = Constant{kKmRelaxation};
  }
  return v;
}

inline std::vector<AlgorithmVariant> table_algorithms() {
  std::vector<AlgorithmVariant> out;
  for (auto algo : {Algorithm::halpern, Algorithm::km, Algorithm::ism, Algorithm::psm}) {
    for (const char* v : {"i", "ii"}) out.push_back(standard_variant(algo, v));
  }
  return out;
}

struct BenchConfig {
  std::size_t dim = 100;
  std::size_t users = 10;
  std::size_t sets = 3;
  std::size_t samples = 100;
  std::size_t max_iters = 2000;
  Regime regime = Regime::feasible;
  std::vector<AlgorithmVariant> algorithms = table_algorithms();
  std::uint64_t seed = 0;
  double stop_f_tol = 1e-3;
  double stop_d_tol = 1e-6;
  unsigned jobs = 1;

  void validate() const {
    if (dim < 1 || users < 1 || sets < 1 || samples < 1) {
      throw UsageError("bench: N, I, K and samples must be at least 1");
    }
    if (!(stop_f_tol > 0.0) || !(stop_d_tol > 0.0)) {
      throw UsageError("bench: stopping tolerances must be positive");
    }
    if (algorithms.empty()) throw UsageError("bench: no algorithms configured");
    if (jobs < 1) throw UsageError("bench: jobs must be at least 1");
    for (const auto& a : algorithms) {
      const SchedulePair pair{a.gamma, a.alpha,
                              a.algorithm == Algorithm::halpern ? ScheduleMode::halpern
                                                                : ScheduleMode::km};
      const auto r = pair.validate();
      if (!r) throw UsageError("bench: " + a.label() + " schedule rejected: " + r.summary());
    }
  }
};

/// Feasible-regime configuration of the published experiment.
inline BenchConfig preset_table1(std::uint64_t seed) {
  BenchConfig cfg;
  cfg.regime = Regime::feasible;
  cfg.seed = seed;
  return cfg;
}

/// Infeasible-regime configuration of the published experiment.
inline BenchConfig preset_table2(std::uint64_t seed) {
  BenchConfig cfg;
  cfg.regime = Regime::infeasible;
  cfg.seed = seed;
  return cfg;
}

namespace detail {

inline Vector unit_direction(RandomSource& rng, std::size_t dim) {
  std::vector<double> c(dim);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (double& v : c) {
      v = rng.normal();
      sq += v * v;
    }
  } while (sq == 0.0);
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : c) v *= inv;
  return Vector(std::move(c));
}

inline NonexpansiveOperator random_gcfs(RandomSource& rng, std::size_t dim, std::size_t sets,
                                        double d_lo, double d_hi) {
  std::vector<ClosedConvexSet> halfspaces;
  halfspaces.reserve(sets);
  for (std::size_t k = 0; k < sets; ++k) {
    Vector c = unit_direction(rng, dim);
    const double d = rng.uniform(d_lo, d_hi);
    halfspaces.emplace_back(HalfSpace(std::move(c), d));
  }
  const std::vector<double> weights(sets, 1.0 / static_cast<double>(sets));
  return make_gcfs_operator(Ball::unit(dim), halfspaces, weights);
}

}  // namespace detail

/// Random weighted-L1 / half-space instance, deterministic in
/// (cfg.seed, sample_index).
inline NetworkProblem generate_instance(const BenchConfig& cfg, std::size_t sample_index) {
  RandomSource rng = RandomSource(cfg.seed).derive("instance", sample_index);
  const std::size_t n = cfg.dim;

  std::optional<NonexpansiveOperator> shared;
  if (cfg.regime == Regime::infeasible) {
    // d_k <= -2 < -1 = min over the unit ball of <c_k, x>, so each C_k misses the ball.
    shared = detail::random_gcfs(rng, n, cfg.sets, -3.0, -2.0);
  }

  std::vector<UserProblem> users;
  users.reserve(cfg.users);
  for (std::size_t i = 0; i < cfg.users; ++i) {
    Vector weights = sample_uniform(rng, n, kWeightFloor, 1.0);
    Vector shifts = sample_uniform(rng, n, -3.0, 3.0);
    NonexpansiveOperator op =
        shared ? *shared : detail::random_gcfs(rng, n, cfg.sets, 0.0, 1.0);
    Vector anchor = sample_uniform(rng, n, -1.0, 1.0);
    users.push_back(UserProblem{WeightedShiftedL1(std::move(weights), std::move(shifts)),
                                std::move(op), std::move(anchor), Ball::unit(n)});
  }
  return NetworkProblem(std::move(users));
}

inline Vector initial_point(const BenchConfig& cfg, std::size_t sample_index) {
  RandomSource rng = RandomSource(cfg.seed).derive("x0", sample_index);
  return sample_uniform(rng, cfg.dim, -1.0, 1.0);
}

/// Smallest n >= 1 with |series[n-1] - series[n]| < tol.
inline std::optional<std::size_t> detect_stop(const std::vector<double>& series, double tol) {
  if (!(tol > 0.0)) throw UsageError("detect_stop: tol must be positive");
  if (series.size() < 2) throw UsageError("detect_stop: series needs at least two entries");
  for (std::size_t n = 1; n < series.size(); ++n) {
    if (std::abs(series[n - 1] - series[n]) < tol) return n;
  }
  return std::nullopt;
}

/// Per-run series kept for every sample so the averages can be audited.
struct SampleSeries {
  std::vector<double> objective;
  std::vector<double> residual;
  std::vector<double> time_s;
};

struct StopHit {
  /// nullopt when the criterion never triggered before the cap.
  std::optional<std::size_t> n;
  /// Mean cumulative solver time up to n (or up to the cap).
  double time_s = 0.0;
  /// Series value at n (or at the cap).
  double value = 0.0;
};

struct AlgorithmReport {
  AlgorithmVariant spec;
  std::vector<double> F;
  std::vector<double> D;
  std::vector<double> cumulative_time_s;
  StopHit stop_F;
  StopHit stop_D;
};

struct BenchReport {
  BenchConfig config;
  std::vector<AlgorithmReport> rows;
  /// samples[s][a]: series of algorithm a on sample s.
  std::vector<std::vector<SampleSeries>> samples;
  /// Every algorithm sees the same instance and initial point per sample.
  bool paired = true;
};

/// Runs every configured algorithm on one sample.
inline std::vector<SampleSeries> run_sample(const BenchConfig& cfg, std::size_t s) {
  const NetworkProblem problem = generate_instance(cfg, s);
  const Vector x0 = initial_point(cfg, s);
  std::vector<SampleSeries> out;
  out.reserve(cfg.algorithms.size());
  if (cfg.max_iters == 0) {
    for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
      out.push_back({{problem.objective(x0)}, {problem.residual_sum(x0)}, {0.0}});
    }
    return out;
  }
  SolverOptions opts;
  opts.max_iters = cfg.max_iters;
  for (const auto& a : cfg.algorithms) {
    RunTrace t = run_algorithm(a.algorithm, problem, a.gamma, a.alpha, x0, opts);
    out.push_back({std::move(t.objective), std::move(t.residual), std::move(t.time_s)});
  }
  return out;
}

namespace detail {

inline StopHit make_hit(const std::vector<double>& series, const std::vector<double>& cum_time,
                        double tol) {
  StopHit h;
  h.n = detect_stop(series, tol);
  const std::size_t at = h.n ? *h.n : series.size() - 1;
  h.time_s = cum_time[at];
  h.value = series[at];
  return h;
}

}  // namespace detail

/// Averages per-sample series into F_n, D_n and mean cumulative time, in
/// sample order, and locates the stopping indices.
inline std::vector<AlgorithmReport> aggregate(const BenchConfig& cfg,
                                              const std::vector<std::vector<SampleSeries>>& samples) {
  const std::size_t len = cfg.max_iters + 1;
  const double count = static_cast<double>(samples.size());
  std::vector<AlgorithmReport> rows;
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    AlgorithmReport r;
    r.spec = cfg.algorithms[a];
    r.F.assign(len, 0.0);
    r.D.assign(len, 0.0);
    r.cumulative_time_s.assign(len, 0.0);
    for (const auto& sample : samples) {
      const SampleSeries& ss = sample[a];
      double cum = 0.0;
      for (std::size_t n = 0; n < len; ++n) {
        r.F[n] += ss.objective[n];
        r.D[n] += ss.residual[n];
        cum += ss.time_s[n];
        r.cumulative_time_s[n] += cum;
      }
    }
    for (std::size_t n = 0; n < len; ++n) {
      r.F[n] /= count;
      r.D[n] /= count;
      r.cumulative_time_s[n] /= count;
    }
    if (len >= 2) {
      r.stop_F = detail::make_hit(r.F, r.cumulative_time_s, cfg.stop_f_tol);
      r.stop_D = detail::make_hit(r.D, r.cumulative_time_s, cfg.stop_d_tol);
    } else {
      r.stop_F = {std::nullopt, 0.0, r.F[0]};
      r.stop_D = {std::nullopt, 0.0, r.D[0]};
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Runs all samples (on cfg.jobs threads) and aggregates. The result does not
/// depend on cfg.jobs apart from the timing columns.
inline BenchReport run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  BenchReport report;
  report.config = cfg;
  report.samples.resize(cfg.samples);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::size_t failed_sample = 0;

  auto worker = [&] {
    for (;;) {
      const std::size_t s = next.fetch_add(1);
      if (s >= cfg.samples) return;
      {
        std::lock_guard lock(error_mutex);
        if (first_error) return;
      }
      try {
        report.samples[s] = run_sample(cfg, s);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error || s < failed_sample) {
          first_error = std::current_exception();
          failed_sample = s;
        }
      }
    }
  };

  const unsigned threads = std::min<std::size_t>(cfg.jobs, cfg.samples);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const NumericFailure& e) {
      throw NumericFailure("sample " + std::to_string(failed_sample) + ": " + e.what(),
                           e.iteration());
    }
  }
  report.rows = aggregate(cfg, report.samples);
  return report;
}

namespace detail {

inline std::string format_real(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string format_time(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

inline std::string format_index(const std::optional<std::size_t>& n, std::size_t cap) {
  return n ? std::to_string(*n) : ">=" + std::to_string(cap);
}

}  // namespace detail

inline constexpr const char* kReportCsvHeader =
    "algorithm,variant,n_F,time_F_s,F_n,n_D,time_D_s,D_n";

/// One row per algorithm/variant. With include_time false the time columns
/// read "NA", which makes the file a pure function of the configuration.
inline std::string report_csv(const BenchReport& report, bool include_time = true) {
  std::ostringstream os;
  os << kReportCsvHeader << '\n';
  const std::size_t cap = report.config.max_iters;
  auto time = [&](double t) { return include_time ? detail::format_time(t) : std::string("NA"); };
  for (const auto& r : report.rows) {
    os << to_string(r.spec.algorithm) << ',' << r.spec.variant << ','
       << detail::format_index(r.stop_F.n, cap) << ',' << time(r.stop_F.time_s) << ','
       << detail::format_real(r.stop_F.value) << ',' << detail::format_index(r.stop_D.n, cap)
       << ',' << time(r.stop_D.time_s) << ',' << detail::format_real(r.stop_D.value) << '\n';
  }
  return os.str();
}

struct OracleResult {
  Vector point;
  double value = 0.0;
};

namespace detail {

inline bool oracle_member(const NetworkProblem& p, std::span<const double> x, double tol) {
  for (const auto& u : p.users()) {
    if (residual(u.T, x) > tol) return false;
  }
  return true;
}

}  // namespace detail

/// Brute-force minimizer of sum_i f_i over the common fixed point set inside
/// the box [lo, hi], for dimension <= 3.
///
/// Grid points count as members when every residual is <= 10 * step. The
/// best grid point that also passes the refined tolerance 10 * step / 100 is
/// polished by 200 rounds of pattern search (coordinate and diagonal moves)
/// whose step shrinks from `step` to `step / 100`, under the refined
/// tolerance.
inline OracleResult oracle_solve(const NetworkProblem& p, const Vector& lo, const Vector& hi,
                                 double step) {
  const std::size_t d = p.dim();
  if (d > 3) throw UsageError("oracle_solve: dimension must be at most 3");
  if (!(step > 0.0)) throw UsageError("oracle_solve: step must be positive");
  detail::require_same_dim(d, lo.dim(), "oracle_solve lo");
  detail::require_same_dim(d, hi.dim(), "oracle_solve hi");

  std::vector<std::size_t> counts(d);
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (!(lo[j] <= hi[j])) throw UsageError("oracle_solve: requires lo <= hi");
    counts[j] = static_cast<std::size_t>(std::floor((hi[j] - lo[j]) / step + 1e-9)) + 1;
    total *= counts[j];
  }

  const double coarse_tol = 10.0 * step;
  const double fine_step = step / 100.0;
  const double fine_tol = 10.0 * fine_step;

  std::vector<double> x(d);
  double best_coarse = std::numeric_limits<double>::infinity();
  double best_fine = std::numeric_limits<double>::infinity();
  std::vector<double> arg_coarse;
  std::vector<double> arg_fine;
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t j = 0; j < d; ++j) {
      idx[j] = rem % counts[j];
      rem /= counts[j];
      x[j] = lo[j] + static_cast<double>(idx[j]) * step;
    }
    const double v = p.objective(x);
    if (v >= best_coarse && v >= best_fine) continue;
    if (v < best_fine && detail::oracle_member(p, x, fine_tol)) {
      best_fine = v;
      arg_fine = x;
    }
    if (v < best_coarse && detail::oracle_member(p, x, coarse_tol)) {
      best_coarse = v;
      arg_coarse = x;
    }
  }
  if (arg_coarse.empty()) throw UsageError("oracle_solve: no grid point in the feasible set");
  if (arg_fine.empty()) return {Vector(arg_coarse), best_coarse};

  // Pattern search over all nonzero moves in {-1, 0, 1}^d.
  std::vector<std::vector<int>> moves;
  std::size_t combos = 1;
  for (std::size_t j = 0; j < d; ++j) combos *= 3;
  for (std::size_t c = 0; c < combos; ++c) {
    std::vector<int> m(d);
    std::size_t rem = c;
    bool nonzero = false;
    for (std::size_t j = 0; j < d; ++j) {
      m[j] = static_cast<int>(rem % 3) - 1;
      rem /= 3;
      nonzero = nonzero || m[j] != 0;
    }
    if (nonzero) moves.push_back(std::move(m));
  }

  std::vector<double> cur = arg_fine;
  double cur_value = best_fine;
  double h = step;
  std::vector<double> trial(d);
  for (int round = 0; round < 200; ++round) {
    bool improved = false;
    for (const auto& m : moves) {
      for (std::size_t j = 0; j < d; ++j) trial[j] = cur[j] + h * m[j];
      const double v = p.objective(trial);
      if (v < cur_value && detail::oracle_member(p, trial, fine_tol)) {
        cur = trial;
        cur_value = v;
        improved = true;
      }
    }
    if (!improved) h = std::max(h * 0.5, fine_step);
  }
  return {Vector(std::move(cur)), cur_value};
}

}  // namespace fixprox

#endif  // FIXPROX_BENCH_HPP
