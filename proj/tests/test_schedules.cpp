#include <array>
#include <cmath>

#include <gtest/gtest.h>

#include "fixprox/schedules.hpp"

using fixprox::Constant;
using fixprox::PowerLaw;
using fixprox::validate_halpern;
using fixprox::validate_km;

namespace {

bool mentions(const fixprox::ValidationResult& r, const std::string& text) {
  for (const auto& v : r.violations) {
    if (v.find(text) != std::string::npos) return true;
  }
  return false;
}

struct Ratios {
  double q1, q2, q3, q4;
};

Ratios ratios_at(const PowerLaw& gamma, const PowerLaw& alpha, std::int64_t n) {
  const double g0 = value_at(gamma, n);
  const double g1 = value_at(gamma, n + 1);
  const double a0 = value_at(alpha, n);
  const double a1 = value_at(alpha, n + 1);
  return {(1.0 / a1) * std::abs(1.0 / g1 - 1.0 / g0), (1.0 / g1) * std::abs(1.0 - a0 / a1),
          (1.0 / a1) * std::abs(g1 - g0) / (g1 * g1), a0 / g0};
}

}  // namespace

TEST(Schedule, Values) {
  EXPECT_DOUBLE_EQ(value_at(PowerLaw{1e-3, 0.25}, 0), 1e-3);
  EXPECT_DOUBLE_EQ(value_at(PowerLaw{1e-3, 0.25}, 15), 5e-4);
  EXPECT_DOUBLE_EQ(value_at(Constant{0.5}, 0), 0.5);
  EXPECT_DOUBLE_EQ(value_at(Constant{0.5}, 123456), 0.5);
  EXPECT_DOUBLE_EQ(value_at(PowerLaw{2.0, 0.0}, 99), 2.0);
  EXPECT_THROW(value_at(PowerLaw{1.0, 1.0}, -1), std::invalid_argument);
}

TEST(Schedule, MonotoneDecrease) {
  for (double e : {0.125, 0.25, 0.5, 0.75, 1.0}) {
    const PowerLaw s{1e-3, e};
    for (std::int64_t n = 0; n < 5000; ++n) {
      ASSERT_LT(value_at(s, n + 1), value_at(s, n));
      ASSERT_GT(value_at(s, n), 0.0);
      ASSERT_LE(value_at(s, n), 1e-3);
    }
  }
}

TEST(Schedule, HalpernValidation) {
  EXPECT_TRUE(validate_halpern({1e-3, 0.25}, {1e-3, 0.5}).ok());
  EXPECT_TRUE(validate_halpern({1e-3, 0.125}, {1e-3, 0.75}).ok());
  const auto bad = validate_halpern({1e-3, 0.3}, {1e-3, 0.2});
  EXPECT_FALSE(bad.ok());
  EXPECT_TRUE(mentions(bad, "b ≤ a"));
  EXPECT_TRUE(mentions(validate_halpern({1e-3, 0.5}, {1e-3, 0.6}), "a not in (0, 1/2)"));
  EXPECT_TRUE(mentions(validate_halpern({1e-3, 0.0}, {1e-3, 0.6}), "a not in (0, 1/2)"));
  EXPECT_TRUE(mentions(validate_halpern({1e-3, 0.25}, {1e-3, 0.8}), "b ≥ 1 − a"));
  EXPECT_TRUE(mentions(validate_halpern({1e-3, 0.25}, {1e-3, 0.8}), "a + b ≥ 1"));
  EXPECT_FALSE(validate_halpern({1e-3, 0.25}, {2.0, 0.5}).ok());
  EXPECT_FALSE(validate_halpern({0.0, 0.25}, {1e-3, 0.5}).ok());
}

TEST(Schedule, KmValidation) {
  EXPECT_TRUE(validate_km({1e-3, 0.25}, {0.5}).ok());
  EXPECT_TRUE(validate_km({1e-3, 1.0}, {0.5}).ok());
  EXPECT_FALSE(validate_km({1e-3, 1.5}, {0.5}).ok());
  EXPECT_FALSE(validate_km({1e-3, 0.5}, {1.0}).ok());
  EXPECT_FALSE(validate_km({1e-3, 0.5}, {0.0}).ok());
  EXPECT_FALSE(validate_km({1e-3, 0.0}, {0.5}).ok());
}

TEST(Schedule, PairDispatch) {
  using fixprox::SchedulePair;
  using fixprox::ScheduleMode;
  EXPECT_TRUE((SchedulePair{{1e-3, 0.25}, PowerLaw{1e-3, 0.5}, ScheduleMode::halpern}.validate().ok()));
  EXPECT_FALSE((SchedulePair{{1e-3, 0.25}, Constant{0.5}, ScheduleMode::halpern}.validate().ok()));
  EXPECT_TRUE((SchedulePair{{1e-3, 0.25}, Constant{0.5}, ScheduleMode::km}.validate().ok()));
  EXPECT_FALSE((SchedulePair{{1e-3, 0.25}, PowerLaw{1e-3, 0.5}, ScheduleMode::km}.validate().ok()));
}

// Asymptotically the four ratios scale as n^(a+b-1), n^(a-1), n^(a+b-1) and
// n^(a-b), so one decade shrinks them by 10^(1-a-b), 10^(1-a), 10^(1-a-b)
// and 10^(b-a).
TEST(ScheduleProperty, HalpernRatiosShrink) {
  const std::array<std::int64_t, 4> ns{1000, 10000, 100000, 1000000};
  for (const auto& [a, b] : {std::pair{0.25, 0.5}, std::pair{0.125, 0.75}, std::pair{0.1, 0.3},
                             std::pair{0.4, 0.45}}) {
    const PowerLaw gamma{1e-3, a};
    const PowerLaw alpha{1e-3, b};
    ASSERT_TRUE(validate_halpern(gamma, alpha).ok());
    const std::array<double, 4> predicted{std::pow(10.0, 1 - a - b), std::pow(10.0, 1 - a),
                                          std::pow(10.0, 1 - a - b), std::pow(10.0, b - a)};
    for (std::size_t k = 0; k + 1 < ns.size(); ++k) {
      const Ratios r0 = ratios_at(gamma, alpha, ns[k]);
      const Ratios r1 = ratios_at(gamma, alpha, ns[k + 1]);
      const std::array<double, 4> factor{r0.q1 / r1.q1, r0.q2 / r1.q2, r0.q3 / r1.q3, r0.q4 / r1.q4};
      for (std::size_t q = 0; q < 4; ++q) {
        SCOPED_TRACE(testing::Message() << "a=" << a << " b=" << b << " q" << q + 1 << " n=" << ns[k]);
        EXPECT_GT(factor[q], 1.0);
        EXPECT_NEAR(factor[q] / predicted[q], 1.0, 0.02);
      }
    }
  }
}

// The fixed factor 1.5 holds for variant (i); variant (ii) has a + b - 1 = -1/8,
// so q1 and q3 shrink by only 10^(1/8) per decade.
TEST(ScheduleProperty, VariantOneShrinksByOnePointFive) {
  const PowerLaw gamma{1e-3, 0.25};
  const PowerLaw alpha{1e-3, 0.5};
  const std::array<std::int64_t, 4> ns{1000, 10000, 100000, 1000000};
  for (std::size_t k = 0; k + 1 < ns.size(); ++k) {
    const Ratios r0 = ratios_at(gamma, alpha, ns[k]);
    const Ratios r1 = ratios_at(gamma, alpha, ns[k + 1]);
    EXPECT_GE(r0.q1 / r1.q1, 1.5);
    EXPECT_GE(r0.q2 / r1.q2, 1.5);
    EXPECT_GE(r0.q3 / r1.q3, 1.5);
    EXPECT_GE(r0.q4 / r1.q4, 1.5);
  }
}
