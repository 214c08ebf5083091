// Complex linear-algebra primitives for multi-qudit systems: tensor products,
// Haar sampling, Weyl operators, swap and symmetric projectors.
//
// Subsystem ordering convention (used everywhere in this library): subsystem
// j = 1 is the MOST significant index. A basis state |i1, i2, ..., in> of n
// qudits of local dimension d maps to the flat index
//   ((i1 * d + i2) * d + ...) * d + in.
// kron(a, b) follows the same convention: the first factor is the most
// significant subsystem.

#pragma once

#include "qdl/common.hpp"
#include "qdl/rng.hpp"

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace qdl {

// Unitary matrix with a checked invariant ||U^dag U - I||_max <= tol.
struct UnitaryMatrix {
  Mat m;

  UnitaryMatrix() = default;
  explicit UnitaryMatrix(Mat mat, double tol = kUnitaryTol) : m(std::move(mat)) {
    require(m.rows() == m.cols() && m.rows() >= 1, "UnitaryMatrix: not square");
    require(m.allFinite(), "UnitaryMatrix: non-finite entries");
    require(is_unitary(m, tol), "UnitaryMatrix: unitarity violated");
  }

  int dim() const { return static_cast<int>(m.rows()); }
};

// Pure state of n qudits of local dimension d; amplitudes of length d^n,
// unit norm within kNormTol.
struct PureState {
  int d = 2;
  int n = 1;
  Vec amp;

  PureState() = default;
  PureState(int local_dim, int num_subsystems, Vec amplitudes)
      : d(local_dim), n(num_subsystems), amp(std::move(amplitudes)) {
    require(d >= 1, "PureState: local_dim must be >= 1");
    require(n >= 1, "PureState: num_subsystems must be >= 1");
    std::int64_t dim = pow_dim(d, n, "PureState");
    require(amp.size() == dim, "PureState: amplitude length != d^n");
    require(amp.allFinite(), "PureState: non-finite amplitudes");
    require(std::abs(amp.squaredNorm() - 1.0) <= kNormTol,
            "PureState: squared norm deviates from 1");
  }

  std::int64_t dim() const { return amp.size(); }
};

inline PureState basis_state(int d, int n, std::int64_t index) {
  std::int64_t dim = pow_dim(d, n, "basis_state");
  require(index >= 0 && index < dim, "basis_state: index out of range");
  Vec v = Vec::Zero(dim);
  v[index] = 1.0;
  return PureState(d, n, std::move(v));
}

// Kronecker product; first factor is the most significant subsystem.
inline Mat kron(const Mat& a, const Mat& b) {
  require(a.size() > 0 && b.size() > 0, "kron: empty operand");
  require(a.allFinite() && b.allFinite(), "kron: non-finite entries");
  std::int64_t rows = static_cast<std::int64_t>(a.rows()) * b.rows();
  std::int64_t cols = static_cast<std::int64_t>(a.cols()) * b.cols();
  require_capacity(rows, "kron");
  require_capacity(cols, "kron");
  Mat out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vec kron_vec(const Vec& a, const Vec& b) {
  std::int64_t dim = static_cast<std::int64_t>(a.size()) * b.size();
  require_capacity(dim, "kron_vec");
  Vec out(dim);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

// Expands a list of per-qudit vectors (subsystem 1 first) into the full
// product vector.
inline Vec product_vector(const std::vector<Vec>& factors) {
  require(!factors.empty(), "product_vector: no factors");
  Vec out = factors.front();
  for (std::size_t j = 1; j < factors.size(); ++j) out = kron_vec(out, factors[j]);
  return out;
}

// Haar-random unitary: complex Ginibre matrix orthonormalized column by
// column with the positive-diagonal QR convention, which makes the
// distribution exactly Haar (plain QR without the phase convention is not).
inline UnitaryMatrix haar_unitary(int d, RngStream& rng) {
  require(d >= 1, "haar_unitary: d must be >= 1");
  Mat g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = Cplx(rng.gaussian(), rng.gaussian());
  // Modified Gram-Schmidt; R has a positive real diagonal by construction.
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < j; ++k) g.col(j) -= g.col(k).dot(g.col(j)) * g.col(k);
    // second pass for numerical orthogonality
    for (int k = 0; k < j; ++k) g.col(j) -= g.col(k).dot(g.col(j)) * g.col(k);
    g.col(j) /= g.col(j).norm();
  }
  UnitaryMatrix u;
  u.m = std::move(g);
  return u;
}

// Generalized Pauli X^a Z^b with X|j> = |j+1 mod d>, Z|j> = w^j |j>,
// w = exp(i 2 pi / d).
inline UnitaryMatrix weyl_operator(int d, int a, int b) {
  require(d >= 1, "weyl_operator: d must be >= 1");
  require(a >= 0 && a < d && b >= 0 && b < d,
          "weyl_operator: powers out of range [0, d)");
  Mat m = Mat::Zero(d, d);
  const double theta = 2.0 * std::numbers::pi / d;
  for (int j = 0; j < d; ++j)
    m((j + a) % d, j) = std::polar(1.0, theta * j * b);
  UnitaryMatrix u;
  u.m = std::move(m);
  return u;
}

// Swap on C^d x C^d: S|a,b> = |b,a>.
inline UnitaryMatrix swap_operator(int d) {
  require(d >= 1, "swap_operator: d must be >= 1");
  std::int64_t dim = static_cast<std::int64_t>(d) * d;
  require_capacity(dim, "swap_operator");
  Mat m = Mat::Zero(dim, dim);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) m(b * d + a, a * d + b) = 1.0;
  UnitaryMatrix u;
  u.m = std::move(m);
  return u;
}

// Projector onto the symmetric subspace of C^d x C^d: (I + S) / 2.
// Idempotent; trace d(d+1)/2.
inline Mat symmetric_projector(int d) {
  Mat s = swap_operator(d).m;
  return (Mat::Identity(s.rows(), s.cols()) + s) / 2.0;
}

// Uniform random unit vector in C^D (normalized complex Gaussian).
inline PureState random_unit_vector(std::int64_t D, RngStream& rng) {
  require(D >= 1, "random_unit_vector: D must be >= 1");
  require_capacity(D, "random_unit_vector");
  Vec v(D);
  for (std::int64_t i = 0; i < D; ++i)
    v[i] = Cplx(rng.gaussian(), rng.gaussian());
  v /= v.norm();
  // Report it as a single-subsystem state of local dimension D.
  return PureState(static_cast<int>(D), 1, std::move(v));
}

inline Vec random_unit_vec(std::int64_t D, RngStream& rng) {
  return random_unit_vector(D, rng).amp;
}

// Random full-rank density matrix G G^dag / tr (G complex Ginibre).
inline Mat random_density_matrix(int d, RngStream& rng) {
  require(d >= 1, "random_density_matrix: d must be >= 1");
  Mat g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = Cplx(rng.gaussian(), rng.gaussian());
  Mat rho = g * g.adjoint();
  rho /= rho.trace().real();
  return (rho + Mat(rho.adjoint())) / 2.0;
}

}  // namespace qdl
