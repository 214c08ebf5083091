// Shared aliases, numeric tolerances and error types used across the library.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qdl {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;

// Hard cap on the total Hilbert-space dimension d^n handled by the library.
inline constexpr std::int64_t kMaxHilbertDim = std::int64_t{1} << 20;

// Default tolerances; individual checks state theirs explicitly when stricter.
inline constexpr double kUnitaryTol = 1e-9;
inline constexpr double kNormTol = 1e-9;
inline constexpr double kEigClipTol = 1e-12;

// Thrown when a requested construction would exceed kMaxHilbertDim.
struct capacity_error : std::length_error {
  explicit capacity_error(const std::string& what) : std::length_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_capacity(std::int64_t dim, const std::string& where) {
  if (dim > kMaxHilbertDim)
    throw capacity_error(where + ": Hilbert dimension " + std::to_string(dim) +
                         " exceeds cap " + std::to_string(kMaxHilbertDim));
}

// d^n with overflow guard; throws capacity_error above the cap.
inline std::int64_t pow_dim(int d, int n, const std::string& where) {
  require(d >= 1 && n >= 0, where + ": bad dimensions");
  std::int64_t acc = 1;
  for (int i = 0; i < n; ++i) {
    acc *= d;
    require_capacity(acc, where);
  }
  return acc;
}

inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline double max_abs(const Mat& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline Mat dagger(const Mat& m) { return m.adjoint(); }

inline bool is_unitary(const Mat& u, double tol = kUnitaryTol) {
  if (u.rows() != u.cols() || !u.allFinite()) return false;
  Mat g = u.adjoint() * u;
  g.diagonal().array() -= 1.0;
  return max_abs(g) <= tol;
}

inline bool is_hermitian(const Mat& m, double tol = 1e-9) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

}  // namespace qdl
