#include "qdl/tensor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

using namespace qdl;

namespace {

Mat pauli_x() {
  Mat x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

// Monte Carlo mean and stderr of f(U) over Haar samples.
template <typename F>
std::pair<double, double> haar_mean(int d, int samples, std::uint64_t seed, F f) {
  RngStream rng(seed);
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < samples; ++i) {
    double v = f(haar_unitary(d, rng).m);
    s1 += v;
    s2 += v * v;
  }
  double mean = s1 / samples;
  double var = std::max(0.0, s2 / samples - mean * mean);
  return {mean, std::sqrt(var / samples)};
}

}  // namespace

TEST(Kron, IdentityCase) {
  Mat i2 = Mat::Identity(2, 2);
  EXPECT_NEAR(max_abs(kron(i2, i2) - Mat::Identity(4, 4)), 0.0, 0.0);
}

TEST(Kron, DiagonalStructure) {
  Mat z(2, 2);
  z << 1, 0, 0, -1;
  Mat out = kron(z, Mat::Identity(2, 2));
  Vec diag(4);
  diag << 1, 1, -1, -1;
  EXPECT_NEAR(max_abs(out - Mat(diag.asDiagonal())), 0.0, 0.0);
}

TEST(Kron, BasisPermutation) {
  Mat xx = kron(pauli_x(), pauli_x());
  Vec v00 = Vec::Zero(4);
  v00[0] = 1.0;
  Vec out = xx * v00;
  EXPECT_NEAR(std::abs(out[3] - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(out.head(3).norm(), 0.0, 1e-15);
}

TEST(Kron, AssociativeOnIntegerMatrices) {
  Mat a(2, 2), b(2, 2), c(2, 2);
  a << 1, 2, 3, 4;
  b << 0, 1, 1, 0;
  c << 2, 0, 0, 5;
  EXPECT_EQ(max_abs(kron(kron(a, b), c) - kron(a, kron(b, c))), 0.0);
}

TEST(Kron, CapacityGuard) {
  Mat big = Mat::Identity(1 << 11, 1 << 11);
  EXPECT_THROW(kron(big, big), capacity_error);
}

TEST(Haar, DomainError) {
  RngStream rng(1);
  EXPECT_THROW(haar_unitary(0, rng), std::invalid_argument);
}

TEST(Haar, DimOneIsPhase) {
  RngStream rng(7);
  for (int i = 0; i < 100; ++i) {
    Mat u = haar_unitary(1, rng).m;
    EXPECT_NEAR(std::abs(u(0, 0)), 1.0, 1e-12);
  }
}

TEST(Haar, UnitarityInvariant) {
  RngStream rng(11);
  for (int d : {2, 3, 5, 8}) {
    for (int i = 0; i < 50; ++i) {
      Mat u = haar_unitary(d, rng).m;
      Mat g = u.adjoint() * u;
      g.diagonal().array() -= 1.0;
      EXPECT_LE(max_abs(g), 1e-9);
    }
  }
}

// First and second moments of |<phi|U|psi>|^2: 1/d and 2/(d(d+1)).
TEST(Haar, MomentOracles) {
  for (int d : {2, 3, 5}) {
    RngStream setup(100 + d);
    Vec phi = random_unit_vec(d, setup);
    Vec psi = random_unit_vec(d, setup);
    auto [m1, se1] = haar_mean(d, 100000, 200 + d, [&](const Mat& u) {
      return std::norm(phi.dot(u * psi));
    });
    EXPECT_NEAR(m1, 1.0 / d, 3.0 * se1) << "d=" << d;
    auto [m2, se2] = haar_mean(d, 100000, 300 + d, [&](const Mat& u) {
      double q = std::norm(phi.dot(u * psi));
      return q * q;
    });
    EXPECT_NEAR(m2, 2.0 / (d * (d + 1.0)), 3.0 * se2) << "d=" << d;
  }
}

// Invariance under fixed left/right rotations: VU and UV match U statistics.
TEST(Haar, LeftRightInvarianceStatistic) {
  const int d = 2;
  RngStream setup(42);
  Mat v = haar_unitary(d, setup).m;
  Vec phi = random_unit_vec(d, setup);
  Vec psi = random_unit_vec(d, setup);
  auto [plain, se_a] = haar_mean(d, 50000, 77, [&](const Mat& u) {
    return std::norm(phi.dot(u * psi));
  });
  auto [left, se_b] = haar_mean(d, 50000, 78, [&](const Mat& u) {
    return std::norm(phi.dot(v * u * psi));
  });
  auto [right, se_c] = haar_mean(d, 50000, 79, [&](const Mat& u) {
    return std::norm(phi.dot(u * v * psi));
  });
  EXPECT_NEAR(plain, left, 3.0 * std::hypot(se_a, se_b));
  EXPECT_NEAR(plain, right, 3.0 * std::hypot(se_a, se_c));
}

TEST(Weyl, QubitXandZ) {
  Mat x = weyl_operator(2, 1, 0).m;
  EXPECT_LE(max_abs(x - pauli_x()), 1e-15);
  Mat z = weyl_operator(2, 0, 1).m;
  Mat zref(2, 2);
  zref << 1, 0, 0, -1;
  EXPECT_LE(max_abs(z - zref), 1e-15);
}

TEST(Weyl, ZeroPowersAreIdentity) {
  for (int d : {2, 3, 5, 7})
    EXPECT_LE(max_abs(weyl_operator(d, 0, 0).m - Mat::Identity(d, d)), 1e-15);
}

TEST(Weyl, OutOfRange) {
  EXPECT_THROW(weyl_operator(2, 2, 0), std::invalid_argument);
  EXPECT_THROW(weyl_operator(2, 0, -1), std::invalid_argument);
}

// W(a,b) W(a',b') = phase * W(a+a' mod d, b+b' mod d); checked through the
// normalized trace |tr(W(sum)^dag W W')| / d = 1.
TEST(Weyl, CompositionUpToPhase) {
  for (int d : {2, 3, 5}) {
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int ap = 0; ap < d; ++ap)
          for (int bp = 0; bp < d; ++bp) {
            Mat prod = weyl_operator(d, a, b).m * weyl_operator(d, ap, bp).m;
            Mat target = weyl_operator(d, (a + ap) % d, (b + bp) % d).m;
            double t = std::abs((target.adjoint() * prod).trace()) / d;
            EXPECT_NEAR(t, 1.0, 1e-9);
          }
  }
}

TEST(Swap, Definition) {
  Mat s = swap_operator(2).m;
  Vec v01 = Vec::Zero(4);
  v01[1] = 1.0;  // |0,1>
  Vec out = s * v01;
  EXPECT_NEAR(std::abs(out[2] - 1.0), 0.0, 1e-15);  // |1,0>
}

TEST(Swap, Involution) {
  Mat s = swap_operator(3).m;
  EXPECT_LE(max_abs(s * s - Mat::Identity(9, 9)), 1e-15);
}

TEST(Swap, TraceEqualsD) {
  // trace of swap equals d, verified on the explicit matrix
  for (int d : {2, 3, 5})
    EXPECT_NEAR(swap_operator(d).m.trace().real(), static_cast<double>(d), 1e-12);
}

TEST(SymmetricProjector, TraceAndIdempotence) {
  for (int d : {2, 3, 4}) {
    Mat q0 = symmetric_projector(d);
    EXPECT_NEAR(q0.trace().real(), d * (d + 1) / 2.0, 1e-12);
    EXPECT_LE(max_abs(q0 * q0 - q0), 1e-12);
  }
}

TEST(SymmetricProjector, FixesSymmetricVectors) {
  RngStream rng(5);
  for (int d : {2, 3}) {
    Mat q0 = symmetric_projector(d);
    Vec x = random_unit_vec(d, rng);
    Vec xx = kron_vec(x, x);
    EXPECT_LE((q0 * xx - xx).norm(), 1e-12);
  }
}

TEST(SymmetricProjector, KillsAntisymmetric) {
  Mat q0 = symmetric_projector(2);
  Vec v = Vec::Zero(4);
  v[1] = 1.0 / std::sqrt(2.0);
  v[2] = -1.0 / std::sqrt(2.0);
  EXPECT_LE((q0 * v).norm(), 1e-12);
}

TEST(RandomUnitVector, NormAndPhaseCase) {
  RngStream rng(3);
  PureState s = random_unit_vector(1, rng);
  EXPECT_NEAR(std::abs(s.amp[0]), 1.0, 1e-12);
  for (int i = 0; i < 20; ++i) {
    PureState t = random_unit_vector(9, rng);
    EXPECT_NEAR(t.amp.norm(), 1.0, 1e-12);
  }
}

TEST(RandomUnitVector, ComponentSymmetry) {
  RngStream rng(17);
  const int samples = 100000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < samples; ++i) {
    Vec v = random_unit_vec(4, rng);
    double x = std::norm(v[0]);
    s1 += x;
    s2 += x * x;
  }
  double mean = s1 / samples;
  double se = std::sqrt(std::max(0.0, s2 / samples - mean * mean) / samples);
  EXPECT_NEAR(mean, 0.25, 3.0 * se);
}

TEST(PureState, NormInvariantEnforced) {
  Vec bad(2);
  bad << 1.0, 1.0;
  EXPECT_THROW(PureState(2, 1, bad), std::invalid_argument);
}
