#include "qdl/rates.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qdl;

namespace {

// Holevo quantity of a channel under the uniform computational-basis
// ensemble: H(N(I/d)) - (1/d) sum_j H(N(|j><j|)).
double holevo_basis_ensemble(const ChannelModel& ch) {
  const int d = ch.input_dim;
  double avg_cond = 0.0;
  for (int j = 0; j < d; ++j) {
    Mat rho = Mat::Zero(d, d);
    rho(j, j) = 1.0;
    avg_cond += von_neumann_entropy(ch.apply(rho));
  }
  return von_neumann_entropy(ch.apply(Mat::Identity(d, d) / d)) - avg_cond / d;
}

}  // namespace

TEST(FEntropy, EndpointsAndReference) {
  for (std::int64_t D : {2, 4, 64}) {
    EXPECT_NEAR(f_entropy(1.0, D), 0.0, 1e-15);
    EXPECT_NEAR(f_entropy(0.0, D), std::log2(double(D)), 1e-12);
  }
  // scalar oracle via eta
  EXPECT_NEAR(f_entropy(0.5, 2), eta(0.75) + eta(0.25), 1e-15);
  EXPECT_NEAR(f_entropy(0.5, 2), 0.811278124459133, 1e-12);
  EXPECT_THROW(f_entropy(1.5, 2), std::invalid_argument);
}

TEST(FEntropy, RangeAndConcavity) {
  const std::int64_t D = 16;
  const int grid = 1000;
  double prev = f_entropy(0.0, D), prev2 = 0.0;
  for (int i = 0; i <= grid; ++i) {
    double p = static_cast<double>(i) / grid;
    double f = f_entropy(p, D);
    EXPECT_GE(f, -1e-12);
    EXPECT_LE(f, std::log2(double(D)) + 1e-12);
    if (i >= 2) {
      // second difference of a concave function is <= 0 (tolerance 1e-9)
      EXPECT_LE(f - 2.0 * prev + prev2, 1e-9);
    }
    prev2 = prev;
    prev = f;
  }
}

TEST(DepAchievableRate, EndpointsAndHolevoOracle) {
  EXPECT_NEAR(dep_achievable_rate(3, 0.0), std::log2(3.0), 1e-12);
  EXPECT_NEAR(dep_achievable_rate(3, 1.0), 0.0, 1e-12);
  ChannelModel bob = conj_depolarizing_bob(2, 0.5);
  EXPECT_NEAR(dep_achievable_rate(2, 0.5), holevo_basis_ensemble(bob), 1e-6);
}

TEST(StrongKeyRate, Values) {
  EXPECT_NEAR(strong_key_rate(2, 1.0), 1.0 - std::log2(1.5), 1e-12);
  EXPECT_NEAR(strong_key_rate(2, 1.0), 0.4150374992788438, 1e-12);
  EXPECT_NEAR(strong_key_rate(2, 0.0), 1.0, 1e-15);
  double prev = 1e300;
  for (double r : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    double k = strong_key_rate(2, r);
    EXPECT_LE(k, prev + 1e-15);
    prev = k;
  }
  EXPECT_THROW(strong_key_rate(2, 1.5), std::invalid_argument);
}

TEST(WeakKeyRate, ValuesAndReduction) {
  EXPECT_NEAR(weak_key_rate(2, 0.0, 0.5), 0.0, 1e-15);
  for (double r : {0.0, 0.3, 1.0})
    EXPECT_NEAR(weak_key_rate(2, 1.0, r), strong_key_rate(2, r), 1e-15);
  EXPECT_NEAR(weak_key_rate(64, 0.5, 3.0), 0.4888160934857728, 1e-12);
  // never above the strong rate
  for (double p : {0.0, 0.3, 0.8, 1.0})
    EXPECT_LE(weak_key_rate(2, p, 0.5), strong_key_rate(2, 0.5) + 1e-15);
}

TEST(ErasureRates, EndpointsAndReference) {
  ErasureRates r0 = erasure_rates(64, 0.0);
  EXPECT_NEAR(r0.R_wl, 6.0, 1e-12);
  EXPECT_NEAR(r0.k, 0.0, 1e-15);
  ErasureRates r1 = erasure_rates(64, 1.0);
  EXPECT_NEAR(r1.R_wl, 0.0, 1e-15);
  EXPECT_NEAR(r1.k, 6.0, 1e-12);
  ErasureRates rh = erasure_rates(64, 0.5);
  EXPECT_NEAR(rh.R_wl, 3.0 - 0.4888160934857728, 1e-12);
  EXPECT_NEAR(rh.P, 0.0, 1e-15);
  EXPECT_NEAR(rh.C, 3.0, 1e-12);
}

TEST(DepRates, EndpointsAndCrossCheck) {
  DepRates r0 = dep_rates(64, 0.0);
  EXPECT_NEAR(r0.R_wl, 6.0, 1e-9);
  DepRates r1 = dep_rates(64, 1.0);
  EXPECT_NEAR(r1.R, 0.0, 1e-12);
  EXPECT_NEAR(r1.R_wl, 0.0, 1e-15);
  // hashing bound: block route vs f(p, d^2) - log2 d, and vs the full
  // Kraus/coherent-information route at small d
  DepRates r = dep_rates(2, 0.3);
  EXPECT_NEAR(r.hashing, f_entropy(0.3, 4) - 1.0, 1e-6);
  ChannelModel bob = conj_depolarizing_bob(2, 0.3);
  ChannelModel eve = depolarizing_channel(2, 0.7);
  EXPECT_NEAR(r.hashing,
              coherent_information(bob, eve, Mat::Identity(2, 2) / 2), 1e-8);
}

TEST(DepRates, BlockRouteMatchesKrausRoute) {
  for (int d : {2, 3, 4}) {
    for (double p : {0.1, 0.6, 0.9}) {
      ChannelModel bob = conj_depolarizing_bob(d, p);
      double full = von_neumann_entropy(bob.apply(Mat::Identity(d, d) / d)) -
                    std::log2(double(d));
      EXPECT_NEAR(dep_hashing_bound(d, p), full, 1e-9) << d << " " << p;
    }
  }
}

TEST(Bootstrap, PrivateCapacityForm) {
  EXPECT_NEAR(bootstrap_rate_private(2.0, 0.0, 1.0), 2.0, 1e-15);
  EXPECT_NEAR(bootstrap_rate_private(2.0, 0.5, 1e12), 2.0, 1e-9);
  EXPECT_THROW(bootstrap_rate_private(6.0, 0.489, 0.0), std::invalid_argument);
}

TEST(Bootstrap, RecycleForm) {
  EXPECT_NEAR(bootstrap_recycle_rate(2.0, 2.0), 0.0, 1e-15);
  EXPECT_NEAR(bootstrap_recycle_rate(6.0, 0.489), 5.511, 1e-12);
  EXPECT_THROW(bootstrap_recycle_rate(0.4, 0.5), std::invalid_argument);
}

TEST(CoherentInformation, ReferenceCases) {
  // p = 1 conjugate-depolarizing at the maximally mixed input: -log2 d
  ChannelModel bob = conj_depolarizing_bob(2, 1.0);
  ChannelModel eve = depolarizing_channel(2, 0.0);
  EXPECT_NEAR(coherent_information(bob, eve, Mat::Identity(2, 2) / 2), -1.0,
              1e-8);
  // identity Bob with a constant pure-output Eve: log2 d
  ChannelModel id = identity_channel(3);
  Mat ground = Mat::Zero(3, 3);
  ground(0, 0) = 1.0;
  ChannelModel constant = p_convex_channel(3, 0.0, ground);
  double ci = coherent_information(id, constant, Mat::Identity(3, 3) / 3);
  EXPECT_NEAR(ci, std::log2(3.0), 1e-10);
  EXPECT_LE(ci, std::log2(3.0) + 1e-8);  // never above log2(input dim)
}

TEST(CoherentInformation, RejectsNonComplementaryPair) {
  ChannelModel id = identity_channel(2);
  ChannelModel dep = depolarizing_channel(2, 0.5);
  EXPECT_THROW(coherent_information(id, dep, Mat::Identity(2, 2) / 2),
               std::invalid_argument);
}

TEST(RateCurve, ErasureShapeAndEndpoints) {
  RateCurve curve = rate_curve("erasure", 64, 101);
  ASSERT_EQ(curve.grid.size(), 101u);
  for (const RateSeries& s : curve.series) {
    ASSERT_EQ(s.values.size(), 101u);
    for (double v : s.values) EXPECT_GE(v, 0.0);
  }
  const RateSeries& wl = curve.find("weak_locking");
  const RateSeries& pc = curve.find("private_capacity");
  const RateSeries& cc = curve.find("classical_capacity");
  EXPECT_NEAR(wl.values.front(), 6.0, 1e-12);
  EXPECT_NEAR(pc.values.front(), 6.0, 1e-12);
  EXPECT_NEAR(cc.values.front(), 6.0, 1e-12);
  EXPECT_NEAR(cc.values[50], 3.0, 1e-12);
  EXPECT_NEAR(wl.values.back(), 0.0, 1e-15);
  for (std::size_t i = 51; i < 101; ++i) EXPECT_NEAR(pc.values[i], 0.0, 1e-12);
  // qualitative claim: weak locking dominates the private capacity
  for (std::size_t i = 0; i < 101; ++i)
    EXPECT_GE(wl.values[i], pc.values[i] - 1e-12) << "i=" << i;
  // weak locking never exceeds the achievable rate / classical capacity
  for (std::size_t i = 0; i < 101; ++i)
    EXPECT_LE(wl.values[i], cc.values[i] + 1e-12);
}

TEST(RateCurve, DepolarizingShapeAndEndpoints) {
  RateCurve curve = rate_curve("depolarizing", 64, 51);
  const RateSeries& wl = curve.find("weak_locking");
  const RateSeries& ar = curve.find("achievable_rate");
  const RateSeries& hb = curve.find("hashing_bound");
  EXPECT_NEAR(wl.values.front(), 6.0, 1e-9);
  EXPECT_NEAR(wl.values.back(), 0.0, 1e-15);
  EXPECT_NEAR(hb.values.front(), 6.0, 1e-9);
  for (std::size_t i = 0; i < wl.values.size(); ++i) {
    EXPECT_LE(wl.values[i], ar.values[i] + 1e-12);
    EXPECT_TRUE(std::isfinite(hb.values[i]));
  }
  EXPECT_THROW(rate_curve("unknown", 4, 11), std::invalid_argument);
}

TEST(RateCurve, CsvSchema) {
  RateCurve e = rate_curve("erasure", 4, 3);
  std::string csv = rate_curve_csv(e);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "p,weak_locking,private_capacity,classical_capacity");
  RateCurve d = rate_curve("depolarizing", 4, 3);
  std::string csv2 = rate_curve_csv(d);
  EXPECT_EQ(csv2.substr(0, csv2.find('\n')),
            "p,weak_locking,hashing_bound,achievable_rate");
  // endpoint row formatting at 9 significant digits
  EXPECT_NE(csv.find("\n0,2,2,2\n"), std::string::npos);
}
