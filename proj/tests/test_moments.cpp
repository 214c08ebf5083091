#include "qdl/moments.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qdl;

TEST(Gamma, ValuesAndMonotonicity) {
  EXPECT_NEAR(gamma_factor(2), 4.0 / 3.0, 1e-15);
  EXPECT_GT(gamma_factor(1000), gamma_factor(2));
  EXPECT_LT(gamma_factor(1000), 2.0);
  EXPECT_THROW(gamma_factor(1), std::invalid_argument);
}

TEST(Gamma, LogIdentity) {
  for (int d = 2; d <= 64; ++d)
    EXPECT_NEAR(std::log2(gamma_factor(d)), 1.0 - std::log2(1.0 + 1.0 / d),
                1e-12);
}

TEST(AnalyticMoments, KnownValues) {
  MomentReport a = analytic_moments(2, 1);
  EXPECT_NEAR(a.analytic_first, 0.5, 1e-15);
  EXPECT_NEAR(a.analytic_second_bound, 1.0 / 3.0, 1e-15);
  MomentReport b = analytic_moments(3, 2);
  EXPECT_NEAR(b.analytic_first, 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(b.analytic_second_bound, 1.0 / 36.0, 1e-15);
}

TEST(AnalyticMoments, RatioIsGammaPower) {
  for (int d : {2, 3, 5})
    for (int n : {1, 2, 3, 7}) {
      MomentReport r = analytic_moments(d, n);
      EXPECT_NEAR(
          r.analytic_second_bound / (r.analytic_first * r.analytic_first),
          std::pow(gamma_factor(d), n), 1e-9 * std::pow(gamma_factor(d), n));
      EXPECT_GE(r.analytic_second_bound / (r.analytic_first * r.analytic_first),
                1.0);
    }
}

TEST(McMoments, FirstMomentOracle) {
  RngStream rng(101);
  MomentReport r = mc_moments(2, 1, 100000, rng, PhiMode::kProduct);
  EXPECT_NEAR(r.mc_first, 0.5, 3.0 * r.mc_first_stderr);
}

TEST(McMoments, SecondMomentTightForProductPhi) {
  RngStream rng(102);
  MomentReport r = mc_moments(2, 2, 100000, rng, PhiMode::kProduct);
  EXPECT_NEAR(r.mc_second, 1.0 / 9.0, 3.0 * r.mc_second_stderr);
}

TEST(McMoments, SecondMomentBoundedForRandomPhi) {
  RngStream rng(103);
  MomentReport r = mc_moments(2, 2, 100000, rng, PhiMode::kRandom);
  EXPECT_LE(r.mc_second, r.analytic_second_bound + 3.0 * r.mc_second_stderr);
  EXPECT_NEAR(r.mc_first, 0.25, 3.0 * r.mc_first_stderr);
}

TEST(McMoments, AgreementGrid) {
  // analytic vs Monte Carlo across the small grid (10^4 trials is plenty at
  // 3 sigma for this smoke-level check; the acceptance suite runs 10^5)
  for (int d : {2, 3})
    for (int n : {1, 2, 3}) {
      RngStream rng(200 + 10 * d + n);
      MomentReport r = mc_moments(d, n, 10000, rng, PhiMode::kProduct);
      EXPECT_NEAR(r.mc_first, r.analytic_first, 3.0 * r.mc_first_stderr)
          << "d=" << d << " n=" << n;
      EXPECT_NEAR(r.mc_second, r.analytic_second_bound,
                  3.0 * r.mc_second_stderr)
          << "d=" << d << " n=" << n;
    }
}

TEST(Maurer, DirectEvaluation) {
  TailBound b = maurer_tail_bound(100, 0.5, 1.0);
  EXPECT_NEAR(b.value, std::exp(-12.5), 1e-18);
  EXPECT_FALSE(b.vacuous);
  TailBound tiny_tau = maurer_tail_bound(100, 1e-12, 1.0);
  EXPECT_NEAR(tiny_tau.value, 1.0, 1e-9);
}

TEST(Maurer, LogLinearInT) {
  TailBound a = maurer_tail_bound(500, 0.3, 0.7);
  TailBound b = maurer_tail_bound(1000, 0.3, 0.7);
  EXPECT_NEAR(b.log2_value, 2.0 * a.log2_value, 1e-12 * std::abs(b.log2_value));
}

TEST(Maurer, DomainErrors) {
  EXPECT_THROW(maurer_tail_bound(0, 0.5, 1.0), std::invalid_argument);
  EXPECT_THROW(maurer_tail_bound(10, -0.1, 1.0), std::invalid_argument);
  EXPECT_THROW(maurer_tail_bound(10, 0.5, 0.0), std::invalid_argument);
}

TEST(Chernoff, DirectEvaluation) {
  TailBound b = chernoff_operator_bound(1000, 0.5, 0.5, 2);
  // independent recomputation, different arrangement
  const long double expo =
      -1000.0L * 0.25L * 0.5L / (4.0L * 0.69314718055994530942L);
  EXPECT_NEAR(b.value, static_cast<double>(2.0L * std::exp(expo)),
              1e-12 * b.value);
  EXPECT_LT(b.value, 1e-19);
}

TEST(Chernoff, SmallTauApproachesD) {
  TailBound b = chernoff_operator_bound(10, 1e-9, 0.5, 7);
  EXPECT_NEAR(b.value, 7.0, 1e-6);
  EXPECT_TRUE(b.vacuous);
}

TEST(Chernoff, MonotoneInT) {
  double prev = 1e300;
  for (std::int64_t t : {10, 100, 1000, 10000}) {
    double v = chernoff_operator_bound(t, 0.2, 0.3, 4).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Chernoff, HypothesisViolation) {
  EXPECT_THROW(chernoff_operator_bound(10, 1.5, 0.5, 2), std::invalid_argument);
}

TEST(KeyThreshold, ReferenceValues) {
  KeyThresholdReport r = key_threshold(2, 1, 2, 0.1);
  // independent long-double recomputation of both branches
  const long double ln2 = 0.69314718055994530942L;
  const long double ln50 = std::log(50.0L);
  const long double sampling = 2.0L * (4.0L / 3.0L) *
                               (100.0L * ln2 + 2000.0L * ln50);
  const long double chernoff = 4.0L * ln2 * ln2 / 0.01L;
  EXPECT_NEAR(r.branch_sampling, static_cast<double>(sampling),
              1e-12 * r.branch_sampling);
  EXPECT_NEAR(r.branch_chernoff, static_cast<double>(chernoff),
              1e-12 * r.branch_chernoff);
  EXPECT_EQ(r.K_min, static_cast<std::uint64_t>(
                         std::ceil(static_cast<double>(sampling))));
}

TEST(KeyThreshold, ChernoffBranchAtFullRate) {
  // M = d^n makes the Chernoff branch 4 ln2 ln(d^n) / eps^2
  KeyThresholdReport r = key_threshold(2, 3, 8, 0.2);
  EXPECT_NEAR(r.branch_chernoff, 4.0 * kLn2 * std::log(8.0) / 0.04,
              1e-10 * r.branch_chernoff);
}

TEST(KeyThreshold, MonotoneInEpsilon) {
  double prev_s = 0.0, prev_c = 0.0;
  bool first = true;
  for (double eps : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    KeyThresholdReport r = key_threshold(2, 2, 4, eps);
    if (!first) {
      EXPECT_LE(r.branch_sampling, prev_s);
      EXPECT_LE(r.branch_chernoff, prev_c);
    }
    prev_s = r.branch_sampling;
    prev_c = r.branch_chernoff;
    first = false;
  }
}

// Numerical limit check of the asymptotic key rate: with eps = 2^{-sqrt(n)}
// and M = d^n (R = log2 d), the per-use rate log2(K_min)/n decreases toward
// max{log2 gamma, log2 d - R} from above and its step shrinks below 0.05
// bits by n = 20.
TEST(KeyThreshold, AsymptoticRateConvergence) {
  const int d = 2;
  const double limit = std::log2(gamma_factor(d));  // log2 d - R = 0 here
  double prev = 1e300;
  double last_step = 1e300;
  for (int n = 2; n <= 20; ++n) {
    const double eps = std::exp2(-std::sqrt(static_cast<double>(n)));
    const std::int64_t M = std::int64_t{1} << n;  // d^n
    KeyThresholdReport r = key_threshold(d, n, M, eps);
    const double rate = r.log2_K_min / n;
    EXPECT_GE(rate, limit);
    EXPECT_LT(rate, prev);
    last_step = prev - rate;
    prev = rate;
  }
  EXPECT_LE(last_step, 0.05);
}

TEST(KeyThreshold, WeakVariant) {
  KeyThresholdReport weak =
      key_threshold(2, 4, 4, 0.2, WeakParams{0.5, 0.0});
  EXPECT_TRUE(weak.delta_defaulted);
  // exact effective-length formula with the 2/eps^4 net term
  const double m = 4 * 0.5;
  const double expect_sampling =
      2.0 * std::pow(gamma_factor(2), m) *
      (std::log(4.0) / 0.04 + 2.0 / 0.0016 * std::log(25.0));
  EXPECT_NEAR(weak.branch_sampling, expect_sampling, 1e-9 * expect_sampling);
  KeyThresholdReport trivial =
      key_threshold(2, 4, 4, 0.2, WeakParams{0.0, 0.0});
  EXPECT_LE(trivial.branch_chernoff, 1.0);
}

TEST(EmpiricalViolation, LowerTailWithinBound) {
  ConcentrationExperiment exp{2, 2, 500, 1, 0.3, 2000, 1};
  RngStream rng(1);
  ViolationResult r = empirical_violation_rate(exp, ViolationEvent::kLowerTail, rng);
  EXPECT_NEAR(r.bound, std::exp(-500 * 0.09 / (2.0 * std::pow(4.0 / 3.0, 2))),
              1e-12);
  EXPECT_LE(r.observed, r.bound + 3.0 * r.observed_stderr);
}

TEST(EmpiricalViolation, SumWindowWithinBound) {
  ConcentrationExperiment exp{2, 2, 500, 4, 0.2, 1000, 2};
  RngStream rng(2);
  ViolationResult r = empirical_violation_rate(exp, ViolationEvent::kSumWindow, rng);
  EXPECT_LE(r.observed, r.bound + 3.0 * r.observed_stderr);
}

TEST(EmpiricalViolation, UpperOperatorWithinBound) {
  ConcentrationExperiment exp{2, 2, 500, 2, 0.5, 500, 3};
  RngStream rng(3);
  ViolationResult r =
      empirical_violation_rate(exp, ViolationEvent::kUpperOperator, rng);
  EXPECT_LE(r.observed, r.bound + 3.0 * r.observed_stderr);
}

TEST(EmpiricalViolation, DegenerateKStillBounded) {
  ConcentrationExperiment exp{2, 2, 1, 1, 0.3, 500, 4};
  RngStream rng(4);
  ViolationResult r = empirical_violation_rate(exp, ViolationEvent::kLowerTail, rng);
  EXPECT_GE(r.bound, 0.9);  // vacuous regime
  EXPECT_LE(r.observed, r.bound + 3.0 * r.observed_stderr);
}

TEST(EmpiricalViolation, InfeasibleEventSpec) {
  ConcentrationExperiment exp{2, 1, 10, 1, 0.6, 100, 5};  // 1-eps-1/d <= 0
  RngStream rng(5);
  EXPECT_THROW(
      empirical_violation_rate(exp, ViolationEvent::kUpperOperator, rng),
      std::invalid_argument);
}
