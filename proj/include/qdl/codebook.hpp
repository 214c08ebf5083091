// Random codebooks and locking-unitary sets, together with the overlap
// statistics q and Q that drive the locking bounds.
//
// A codebook holds M product codewords |psi_c> = (x) _j |x_{j,c}>, each factor
// a single-qudit state; a locking set holds K rows of n independent Haar
// unitaries. Factors are stored per qudit and expanded lazily: the full d^n
// vector only materializes when needed.

#pragma once

#include "qdl/common.hpp"
#include "qdl/rng.hpp"
#include "qdl/tensor.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace qdl {

enum class Ensemble {
  kHaarPure,  // i.i.d. Haar-random single-qudit states (default)
  kBasis,     // computational-basis single-qudit states
};

struct Codebook {
  int d = 2;
  int n = 1;
  int M = 1;
  std::uint64_t seed = 0;
  // factors[c * n + j] = |x_{j+1, c+1}>, a length-d unit vector.
  std::vector<Vec> factors;

  const Vec& factor(int c, int j) const { return factors[c * n + j]; }

  // Expanded d^n codeword vector, subsystem 1 most significant.
  Vec codeword(int c) const {
    require(c >= 0 && c < M, "Codebook::codeword: index out of range");
    Vec v = factor(c, 0);
    for (int j = 1; j < n; ++j) v = kron_vec(v, factor(c, j));
    return v;
  }

  std::int64_t dim() const { return pow_dim(d, n, "Codebook"); }
};

struct LockingSet {
  int d = 2;
  int n = 1;
  int K = 1;
  std::uint64_t seed = 0;
  // units[s * n + j] = U_{j+1}^{(s+1)}.
  std::vector<UnitaryMatrix> units;

  const Mat& unit(int s, int j) const { return units[s * n + j].m; }

  std::int64_t dim() const { return pow_dim(d, n, "LockingSet"); }
};

// Key-averaged overlaps Q_c(phi) = (1/K) sum_s |<phi|psi_c^{(s)}>|^2.
struct QVector {
  std::vector<double> values;
};

// Messages are uniform with prior 1/M; non-uniform priors are rejected by
// construction (the analysis assumes p(c) = 1/M).
inline Codebook sample_codebook(int d, int n, int M, Ensemble ensemble,
                                RngStream& rng, bool distinct_basis = false) {
  require(d >= 2, "sample_codebook: d must be >= 2");
  require(n >= 1, "sample_codebook: n must be >= 1");
  require(M >= 1, "sample_codebook: M must be >= 1");
  std::int64_t dim = pow_dim(d, n, "sample_codebook");

  Codebook cb;
  cb.d = d;
  cb.n = n;
  cb.M = M;
  cb.seed = rng.base_seed();
  cb.factors.reserve(static_cast<std::size_t>(M) * n);

  if (ensemble == Ensemble::kBasis && distinct_basis) {
    if (M > dim)
      throw std::invalid_argument(
          "sample_codebook: M distinct basis codewords require M <= d^n");
    // Sample M distinct basis indices of the full space, then split each
    // into per-qudit digits (most significant subsystem first).
    std::vector<std::int64_t> picks;
    picks.reserve(M);
    while (static_cast<int>(picks.size()) < M) {
      std::int64_t idx = static_cast<std::int64_t>(rng.index(dim));
      if (std::find(picks.begin(), picks.end(), idx) == picks.end())
        picks.push_back(idx);
    }
    for (int c = 0; c < M; ++c) {
      std::int64_t rest = picks[c];
      std::vector<int> digits(n);
      for (int j = n - 1; j >= 0; --j) {
        digits[j] = static_cast<int>(rest % d);
        rest /= d;
      }
      for (int j = 0; j < n; ++j) {
        Vec v = Vec::Zero(d);
        v[digits[j]] = 1.0;
        cb.factors.push_back(std::move(v));
      }
    }
    return cb;
  }

  for (int c = 0; c < M; ++c) {
    for (int j = 0; j < n; ++j) {
      if (ensemble == Ensemble::kBasis) {
        Vec v = Vec::Zero(d);
        v[rng.index(d)] = 1.0;
        cb.factors.push_back(std::move(v));
      } else {
        cb.factors.push_back(random_unit_vec(d, rng));
      }
    }
  }
  return cb;
}

inline LockingSet sample_locking_set(int d, int n, int K, RngStream& rng) {
  require(d >= 2, "sample_locking_set: d must be >= 2");
  require(n >= 1, "sample_locking_set: n must be >= 1");
  require(K >= 1, "sample_locking_set: K must be >= 1");
  pow_dim(d, n, "sample_locking_set");
  LockingSet ls;
  ls.d = d;
  ls.n = n;
  ls.K = K;
  ls.seed = rng.base_seed();
  ls.units.reserve(static_cast<std::size_t>(K) * n);
  for (int s = 0; s < K; ++s)
    for (int j = 0; j < n; ++j) ls.units.push_back(haar_unitary(d, rng));
  return ls;
}

// Locking set with explicitly given rows (e.g. the d^2 Weyl operators);
// every entry is re-checked for unitarity.
inline LockingSet locking_set_from_units(int d, int n,
                                         const std::vector<Mat>& rows) {
  require(!rows.empty() && rows.size() % n == 0,
          "locking_set_from_units: rows must be a multiple of n");
  LockingSet ls;
  ls.d = d;
  ls.n = n;
  ls.K = static_cast<int>(rows.size()) / n;
  for (const Mat& u : rows) {
    require(u.rows() == d && u.cols() == d,
            "locking_set_from_units: wrong unitary dimension");
    ls.units.emplace_back(u);
  }
  return ls;
}

inline LockingSet identity_locking_set(int d, int n, int K = 1) {
  std::vector<Mat> rows(static_cast<std::size_t>(K) * n, Mat::Identity(d, d));
  return locking_set_from_units(d, n, rows);
}

// All d^2 Weyl operators X^a Z^b as a K = d^2 locking set for n = 1.
inline LockingSet weyl_locking_set(int d) {
  std::vector<Mat> rows;
  rows.reserve(static_cast<std::size_t>(d) * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) rows.push_back(weyl_operator(d, a, b).m);
  return locking_set_from_units(d, 1, rows);
}

inline void check_cb_ls(const Codebook& cb, const LockingSet& ls,
                        const std::string& where) {
  require(cb.d == ls.d && cb.n == ls.n, where + ": codebook/locking-set shape mismatch");
}

// Locked codeword |psi_c^{(s)}> = (x)_j U_j^{(s)} |x_{j,c}>. Indices are
// 0-based here; the constructions are 1-based in prose.
inline PureState locked_codeword(const Codebook& cb, const LockingSet& ls,
                                 int c, int s) {
  check_cb_ls(cb, ls, "locked_codeword");
  require(c >= 0 && c < cb.M, "locked_codeword: message index out of range");
  require(s >= 0 && s < ls.K, "locked_codeword: key index out of range");
  Vec v = ls.unit(s, 0) * cb.factor(c, 0);
  for (int j = 1; j < cb.n; ++j) v = kron_vec(v, ls.unit(s, j) * cb.factor(c, j));
  return PureState(cb.d, cb.n, std::move(v));
}

// q_c^{(s)}(phi) = |<phi|psi_c^{(s)}>|^2, evaluated without expanding the
// locked codeword when phi itself is not needed in product form.
inline double q_value(const Vec& phi, const Codebook& cb, const LockingSet& ls,
                      int c, int s) {
  check_cb_ls(cb, ls, "q_value");
  require(phi.size() == cb.dim(), "q_value: phi dimension mismatch");
  require(c >= 0 && c < cb.M, "q_value: message index out of range");
  require(s >= 0 && s < ls.K, "q_value: key index out of range");
  Vec v = ls.unit(s, 0) * cb.factor(c, 0);
  for (int j = 1; j < cb.n; ++j) v = kron_vec(v, ls.unit(s, j) * cb.factor(c, j));
  return std::norm(phi.dot(v));
}

inline double q_value(const PureState& phi, const Codebook& cb,
                      const LockingSet& ls, int c, int s) {
  return q_value(phi.amp, cb, ls, c, s);
}

inline QVector q_vector(const Vec& phi, const Codebook& cb,
                        const LockingSet& ls) {
  check_cb_ls(cb, ls, "q_vector");
  require(phi.size() == cb.dim(), "q_vector: phi dimension mismatch");
  QVector q;
  q.values.assign(cb.M, 0.0);
  for (int c = 0; c < cb.M; ++c) {
    double acc = 0.0;
    for (int s = 0; s < ls.K; ++s) acc += q_value(phi, cb, ls, c, s);
    q.values[c] = acc / ls.K;
  }
  return q;
}

inline QVector q_vector(const PureState& phi, const Codebook& cb,
                        const LockingSet& ls) {
  return q_vector(phi.amp, cb, ls);
}

// Eve's marginal for message c: (1/K) sum_s |psi_c^{(s)}><psi_c^{(s)}|.
inline Mat eve_marginal(const Codebook& cb, const LockingSet& ls, int c) {
  check_cb_ls(cb, ls, "eve_marginal");
  require(c >= 0 && c < cb.M, "eve_marginal: index out of range");
  std::int64_t dim = cb.dim();
  Mat rho = Mat::Zero(dim, dim);
  for (int s = 0; s < ls.K; ++s) {
    Vec v = ls.unit(s, 0) * cb.factor(c, 0);
    for (int j = 1; j < cb.n; ++j)
      v = kron_vec(v, ls.unit(s, j) * cb.factor(c, j));
    rho.noalias() += v * v.adjoint();
  }
  return rho / ls.K;
}

// --- text serialization (reproducibility audits) ---------------------------
//
// Format: a header line, then "key value" lines, then one complex entry per
// line as "re im" with %.17g (round-trips doubles exactly).
//   qdl-codebook v1 / d n M seed, entries row-major by (c, j, component)
//   qdl-lockingset v1 / d n K seed, entries row-major by (s, j, row, col)

namespace detail {
inline std::string fmt_complex(const Cplx& z) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g %.17g", z.real(), z.imag());
  return buf;
}

inline Cplx parse_complex(const std::string& line) {
  std::istringstream in(line);
  double re = 0.0, im = 0.0;
  if (!(in >> re >> im))
    throw std::invalid_argument("parse_complex: malformed entry line");
  return {re, im};
}

inline std::int64_t read_header_field(std::istream& in, const std::string& key) {
  std::string k;
  long long v = 0;
  if (!(in >> k >> v) || k != key)
    throw std::invalid_argument("deserialize: expected header field " + key);
  return v;
}
}  // namespace detail

inline std::string serialize(const Codebook& cb) {
  std::ostringstream out;
  out << "qdl-codebook v1\n"
      << "d " << cb.d << "\nn " << cb.n << "\nM " << cb.M << "\nseed "
      << cb.seed << "\n";
  for (const Vec& f : cb.factors)
    for (Eigen::Index i = 0; i < f.size(); ++i)
      out << detail::fmt_complex(f[i]) << "\n";
  return out.str();
}

inline Codebook deserialize_codebook(std::istream& in) {
  std::string magic, version;
  in >> magic >> version;
  require(magic == "qdl-codebook" && version == "v1",
          "deserialize_codebook: bad header");
  Codebook cb;
  cb.d = static_cast<int>(detail::read_header_field(in, "d"));
  cb.n = static_cast<int>(detail::read_header_field(in, "n"));
  cb.M = static_cast<int>(detail::read_header_field(in, "M"));
  cb.seed = static_cast<std::uint64_t>(detail::read_header_field(in, "seed"));
  std::string line;
  std::getline(in, line);
  cb.factors.reserve(static_cast<std::size_t>(cb.M) * cb.n);
  for (int r = 0; r < cb.M * cb.n; ++r) {
    Vec f(cb.d);
    for (int i = 0; i < cb.d; ++i) {
      if (!std::getline(in, line))
        throw std::invalid_argument("deserialize_codebook: truncated file");
      f[i] = detail::parse_complex(line);
    }
    cb.factors.push_back(std::move(f));
  }
  return cb;
}

inline std::string serialize(const LockingSet& ls) {
  std::ostringstream out;
  out << "qdl-lockingset v1\n"
      << "d " << ls.d << "\nn " << ls.n << "\nK " << ls.K << "\nseed "
      << ls.seed << "\n";
  for (const UnitaryMatrix& u : ls.units)
    for (Eigen::Index r = 0; r < u.m.rows(); ++r)
      for (Eigen::Index c = 0; c < u.m.cols(); ++c)
        out << detail::fmt_complex(u.m(r, c)) << "\n";
  return out.str();
}

inline LockingSet deserialize_locking_set(std::istream& in) {
  std::string magic, version;
  in >> magic >> version;
  require(magic == "qdl-lockingset" && version == "v1",
          "deserialize_locking_set: bad header");
  LockingSet ls;
  ls.d = static_cast<int>(detail::read_header_field(in, "d"));
  ls.n = static_cast<int>(detail::read_header_field(in, "n"));
  ls.K = static_cast<int>(detail::read_header_field(in, "K"));
  ls.seed = static_cast<std::uint64_t>(detail::read_header_field(in, "seed"));
  std::string line;
  std::getline(in, line);
  ls.units.reserve(static_cast<std::size_t>(ls.K) * ls.n);
  for (int r = 0; r < ls.K * ls.n; ++r) {
    Mat u(ls.d, ls.d);
    for (int i = 0; i < ls.d; ++i)
      for (int j = 0; j < ls.d; ++j) {
        if (!std::getline(in, line))
          throw std::invalid_argument("deserialize_locking_set: truncated file");
        u(i, j) = detail::parse_complex(line);
      }
    ls.units.emplace_back(std::move(u));
  }
  return ls;
}

}  // namespace qdl
