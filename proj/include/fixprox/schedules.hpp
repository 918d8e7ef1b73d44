#ifndef FIXPROX_SCHEDULES_HPP
#define FIXPROX_SCHEDULES_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fixprox/errors.hpp"

namespace fixprox {

/// n -> scale / (n + 1)^exponent, n zero-based.
struct PowerLaw {
  double scale = 1.0;
  double exponent = 0.0;

  friend bool operator==(const PowerLaw&, const PowerLaw&) = default;
};

/// n -> value
struct Constant {
  double value = 0.5;

  friend bool operator==(const Constant&, const Constant&) = default;
};

inline void require_index(std::int64_t n) {
  if (n < 0) throw UsageError("schedule index must be nonnegative");
}

inline double value_at(const PowerLaw& s, std::int64_t n) {
  require_index(n);
  if (s.exponent == 0.0) return s.scale;
  return s.scale / std::pow(static_cast<double>(n) + 1.0, s.exponent);
}

inline double value_at(const Constant& s, std::int64_t n) {
  require_index(n);
  return s.value;
}

using StepSequence = std::variant<PowerLaw, Constant>;

inline double value_at(const StepSequence& s, std::int64_t n) {
  return std::visit([n](const auto& v) { return value_at(v, n); }, s);
}

struct ValidationResult {
  std::vector<std::string> violations;

  bool ok() const noexcept { return violations.empty(); }
  explicit operator bool() const noexcept { return ok(); }

  std::string summary() const {
    if (ok()) return "valid";
    std::string s;
    for (const auto& v : violations) {
      if (!s.empty()) s += "; ";
      s += v;
    }
    return s;
  }
};

namespace detail {

inline void check_scale(const PowerLaw& s, const char* name, ValidationResult& r) {
  if (!(s.scale > 0.0) || !std::isfinite(s.scale)) {
    r.violations.push_back(std::string(name) + " scale must be positive");
  }
}

}  // namespace detail

/// Sufficient conditions for the Halpern-type method: with
/// gamma_n = c/(n+1)^a and alpha_n = c'/(n+1)^b, require a in (0, 1/2),
/// b in (a, 1 - a), a + b < 1, and alpha_n in (0, 1].
inline ValidationResult validate_halpern(const PowerLaw& gamma, const PowerLaw& alpha) {
  ValidationResult r;
  detail::check_scale(gamma, "gamma", r);
  detail::check_scale(alpha, "alpha", r);
  if (alpha.scale > 1.0) r.violations.push_back("alpha scale > 1 (alpha_n must lie in (0,1])");
  const double a = gamma.exponent;
  const double b = alpha.exponent;
  if (!(a > 0.0 && a < 0.5)) r.violations.push_back("a not in (0, 1/2)");
  if (!(b > a)) r.violations.push_back("b ≤ a");
  if (!(b < 1.0 - a)) r.violations.push_back("b ≥ 1 − a");
  if (!(a + b < 1.0)) r.violations.push_back("a + b ≥ 1");
  return r;
}

/// Sufficient conditions for the KM-type method: gamma_n = c/(n+1)^a with
/// a in (0, 1], and constant alpha_n = t in (0, 1).
inline ValidationResult validate_km(const PowerLaw& gamma, const Constant& alpha) {
  ValidationResult r;
  detail::check_scale(gamma, "gamma", r);
  const double a = gamma.exponent;
  if (!(a > 0.0)) r.violations.push_back("a ≤ 0 (gamma_n does not vanish)");
  if (!(a <= 1.0)) r.violations.push_back("a > 1 (sum of gamma_n is finite)");
  if (!(alpha.value > 0.0 && alpha.value < 1.0)) r.violations.push_back("t not in (0, 1)");
  return r;
}

enum class ScheduleMode { halpern, km };

struct SchedulePair {
  PowerLaw gamma;
  StepSequence alpha;
  ScheduleMode mode = ScheduleMode::km;

  ValidationResult validate() const {
    if (mode == ScheduleMode::halpern) {
      if (const auto* a = std::get_if<PowerLaw>(&alpha)) return validate_halpern(gamma, *a);
      return {{"halpern mode requires a power-law alpha"}};
    }
    if (const auto* a = std::get_if<Constant>(&alpha)) return validate_km(gamma, *a);
    return {{"km mode requires a constant alpha"}};
  }
};

}  // namespace fixprox

#endif  // FIXPROX_SCHEDULES_HPP
