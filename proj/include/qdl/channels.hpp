// The p rho + (1-p) sigma channel family: erasure, depolarizing, the
// conjugate-depolarizing channel to Bob, their isometric extension, CPTP
// validation, and the dephasing-to-erasure reduction.

#pragma once

#include "qdl/common.hpp"
#include "qdl/rng.hpp"
#include "qdl/tensor.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace qdl {

// Partial trace over the subsystems listed in `traced` (0-based positions
// into `dims`, subsystem 0 most significant).
inline Mat partial_trace(const Mat& rho, const std::vector<int>& dims,
                         const std::vector<int>& traced) {
  std::int64_t total = 1;
  for (int d : dims) total *= d;
  require(rho.rows() == total && rho.cols() == total,
          "partial_trace: dimension mismatch");
  std::vector<bool> is_traced(dims.size(), false);
  for (int t : traced) {
    require(t >= 0 && t < static_cast<int>(dims.size()),
            "partial_trace: bad subsystem index");
    is_traced[t] = true;
  }
  std::vector<std::int64_t> stride(dims.size());
  std::int64_t acc = 1;
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    stride[k] = acc;
    acc *= dims[k];
  }
  std::int64_t keep_dim = 1, trace_dim = 1;
  std::vector<int> keep;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (is_traced[k])
      trace_dim *= dims[k];
    else {
      keep_dim *= dims[k];
      keep.push_back(static_cast<int>(k));
    }
  }
  std::vector<int> tr;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (is_traced[k]) tr.push_back(static_cast<int>(k));

  auto flat = [&](std::int64_t keep_idx, std::int64_t trace_idx) {
    std::int64_t f = 0;
    for (int k = static_cast<int>(keep.size()) - 1; k >= 0; --k) {
      f += (keep_idx % dims[keep[k]]) * stride[keep[k]];
      keep_idx /= dims[keep[k]];
    }
    for (int k = static_cast<int>(tr.size()) - 1; k >= 0; --k) {
      f += (trace_idx % dims[tr[k]]) * stride[tr[k]];
      trace_idx /= dims[tr[k]];
    }
    return f;
  };

  Mat out = Mat::Zero(keep_dim, keep_dim);
  for (std::int64_t a = 0; a < keep_dim; ++a)
    for (std::int64_t b = 0; b < keep_dim; ++b) {
      Cplx sum = 0.0;
      for (std::int64_t t = 0; t < trace_dim; ++t)
        sum += rho(flat(a, t), flat(b, t));
      out(a, b) = sum;
    }
  return out;
}

inline bool is_density_matrix(const Mat& rho, double tol = 1e-9) {
  if (rho.rows() != rho.cols() || !rho.allFinite()) return false;
  if (!is_hermitian(rho, tol)) return false;
  if (std::abs(rho.trace().real() - 1.0) > tol) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

// ---------------------------------------------------------------------------

struct ChannelModel {
  std::string label;
  int input_dim = 0;
  int output_dim = 0;
  std::vector<Mat> kraus;

  Mat apply(const Mat& rho) const {
    require(rho.rows() == input_dim && rho.cols() == input_dim,
            "ChannelModel::apply: input dimension mismatch");
    Mat out = Mat::Zero(output_dim, output_dim);
    for (const Mat& k : kraus) out.noalias() += k * rho * k.adjoint();
    return out;
  }

  // Samples one Kraus branch for a pure input (quantum trajectory); returns
  // the normalized post-branch state and the branch index.
  std::pair<Vec, int> sample_apply(const Vec& psi, RngStream& rng) const {
    require(psi.size() == input_dim,
            "ChannelModel::sample_apply: input dimension mismatch");
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k < kraus.size(); ++k) {
      Vec v = kraus[k] * psi;
      double p = v.squaredNorm();
      acc += p;
      if (u < acc || k + 1 == kraus.size()) {
        require(p > 1e-300, "ChannelModel::sample_apply: zero-probability branch");
        v /= std::sqrt(p);
        return {std::move(v), static_cast<int>(k)};
      }
    }
    throw std::logic_error("ChannelModel::sample_apply: unreachable");
  }
};

inline ChannelModel identity_channel(int d) {
  ChannelModel ch;
  ch.label = "identity(d=" + std::to_string(d) + ")";
  ch.input_dim = ch.output_dim = d;
  ch.kraus = {Mat::Identity(d, d)};
  return ch;
}

// Eve-side channel of the family: rho -> p rho + (1-p) sigma. The
// replace-with-sigma part uses the Kraus family sqrt(lambda_i) |u_i><j| from
// sigma's eigendecomposition (its purification in operator form).
inline ChannelModel p_convex_channel(int d, double p, const Mat& sigma) {
  require(d >= 2, "p_convex_channel: d must be >= 2");
  require(p >= 0.0 && p <= 1.0, "p_convex_channel: p outside [0, 1]");
  require(sigma.rows() == d && sigma.cols() == d && is_density_matrix(sigma),
          "p_convex_channel: sigma is not a density matrix");
  ChannelModel ch;
  std::ostringstream lbl;
  lbl << "pconvex(d=" << d << ",p=" << p << ")";
  ch.label = lbl.str();
  ch.input_dim = ch.output_dim = d;
  if (p > 0.0) ch.kraus.push_back(std::sqrt(p) * Mat::Identity(d, d));
  if (p < 1.0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
    for (int i = 0; i < d; ++i) {
      double lam = std::max(0.0, es.eigenvalues()[i]);
      if (lam < kEigClipTol) continue;
      for (int j = 0; j < d; ++j) {
        Mat k = Mat::Zero(d, d);
        k.col(j) = std::sqrt((1.0 - p) * lam) * es.eigenvectors().col(i);
        ch.kraus.push_back(std::move(k));
      }
    }
  }
  return ch;
}

// Qudit erasure channel: output dimension d+1, flag state |d> orthogonal to
// the input space, erased with probability q_erase.
inline ChannelModel erasure_channel(int d, double q_erase) {
  require(d >= 2, "erasure_channel: d must be >= 2");
  require(q_erase >= 0.0 && q_erase <= 1.0,
          "erasure_channel: q_erase outside [0, 1]");
  ChannelModel ch;
  std::ostringstream lbl;
  lbl << "erasure(d=" << d << ",q=" << q_erase << ")";
  ch.label = lbl.str();
  ch.input_dim = d;
  ch.output_dim = d + 1;
  if (q_erase < 1.0) {
    Mat embed = Mat::Zero(d + 1, d);
    embed.topRows(d) = Mat::Identity(d, d);
    ch.kraus.push_back(std::sqrt(1.0 - q_erase) * embed);
  }
  if (q_erase > 0.0) {
    for (int j = 0; j < d; ++j) {
      Mat k = Mat::Zero(d + 1, d);
      k(d, j) = std::sqrt(q_erase);
      ch.kraus.push_back(std::move(k));
    }
  }
  return ch;
}

// Weyl-twirl weights of the conjugate-depolarizing construction:
// q_00 = p + (1-p)/d^2, q_ab = (1-p)/d^2 otherwise.
inline double conj_dep_weight(int d, double p, int a, int b) {
  const double base = (1.0 - p) / (static_cast<double>(d) * d);
  return (a == 0 && b == 0) ? p + base : base;
}

// Channel to Bob when Eve's channel is depolarizing-conjugate: input d,
// output d^2, matrix elements
//   sqrt(q_ab q_a'b') Tr(X^a Z^b rho Z^{-b'} X^{-a'}) |ab><a'b'|.
// Kraus operators K_j = sum_ab sqrt(q_ab) |ab><j| X^a Z^b for j = 0..d-1.
inline ChannelModel conj_depolarizing_bob(int d, double p) {
  require(d >= 2, "conj_depolarizing_bob: d must be >= 2");
  require(p >= 0.0 && p <= 1.0, "conj_depolarizing_bob: p outside [0, 1]");
  ChannelModel ch;
  std::ostringstream lbl;
  lbl << "conj_dep_bob(d=" << d << ",p=" << p << ")";
  ch.label = lbl.str();
  ch.input_dim = d;
  ch.output_dim = d * d;
  const double theta = 2.0 * std::numbers::pi / d;
  for (int j = 0; j < d; ++j) {
    Mat k = Mat::Zero(d * d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const int i = (j - a + d) % d;  // <j| X^a Z^b = w^{ib} <i|
        k(a * d + b, i) =
            std::sqrt(conj_dep_weight(d, p, a, b)) * std::polar(1.0, theta * i * b);
      }
    ch.kraus.push_back(std::move(k));
  }
  return ch;
}

// Qudit depolarizing channel rho -> (1-depol) rho + depol I/d, realized
// through the Weyl twirl (1/d^2) sum_ab X^a Z^b rho Z^{-b} X^{-a}.
inline ChannelModel depolarizing_channel(int d, double depol) {
  require(d >= 2, "depolarizing_channel: d must be >= 2");
  require(depol >= 0.0 && depol <= 1.0,
          "depolarizing_channel: depol outside [0, 1]");
  ChannelModel ch;
  std::ostringstream lbl;
  lbl << "depolarizing(d=" << d << ",depol=" << depol << ")";
  ch.label = lbl.str();
  ch.input_dim = ch.output_dim = d;
  const double w = depol / (static_cast<double>(d) * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double coeff = (a == 0 && b == 0) ? 1.0 - depol + w : w;
      if (coeff <= 0.0) continue;
      ch.kraus.push_back(std::sqrt(coeff) * weyl_operator(d, a, b).m);
    }
  return ch;
}

// ---------------------------------------------------------------------------
// Isometric extension of rho -> p rho + (1-p) sigma
//
// Systems: 1, 2, 3 are qudits, 4 is a qubit; subsystem 1 is most significant.
// U_1234 = I_123 (x) |0><0|_4 + S_12 (x) I_3 (x) |1><1|_4, and the
// environment starts in |phi>_23 (x) (sqrt(p)|0> + sqrt(1-p)|1>)_4 where
// |phi>_23 purifies sigma.

struct IsometryModel {
  int d = 2;
  double p = 0.0;
  Mat sigma;
  Mat U;        // 2 d^3 x 2 d^3 permutation unitary
  Vec env;      // environment state on systems (2,3,4), length 2 d^2
  Vec phi23;    // purification of sigma on (2,3), length d^2

  std::vector<int> full_dims() const { return {d, d, d, 2}; }
  std::vector<int> bob_dims() const { return {d, d, 2}; }
};

// Canonical purification |phi>_23 = sum_i sqrt(lambda_i) |u_i>|u_i>, with
// eigenvalues in descending order and each eigenvector's phase fixed by
// making its first nonzero component positive real. Both marginals of
// |phi>_23 then equal sigma.
inline Vec canonical_purification(const Mat& sigma) {
  const int d = static_cast<int>(sigma.rows());
  Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
  Vec phi = Vec::Zero(static_cast<std::int64_t>(d) * d);
  for (int i = d - 1; i >= 0; --i) {  // solver sorts ascending
    double lam = std::max(0.0, es.eigenvalues()[i]);
    if (lam < kEigClipTol) continue;
    Vec u = es.eigenvectors().col(i);
    for (int r = 0; r < d; ++r) {
      if (std::abs(u[r]) > 1e-12) {
        u *= std::conj(u[r]) / std::abs(u[r]);
        break;
      }
    }
    phi += std::sqrt(lam) * kron_vec(u, u);
  }
  return phi;
}

inline IsometryModel general_isometry(int d, double p, const Mat& sigma) {
  require(d >= 2, "general_isometry: d must be >= 2");
  require(p >= 0.0 && p <= 1.0, "general_isometry: p outside [0, 1]");
  require(sigma.rows() == d && sigma.cols() == d && is_density_matrix(sigma),
          "general_isometry: sigma is not a density matrix");
  IsometryModel iso;
  iso.d = d;
  iso.p = p;
  iso.sigma = sigma;
  iso.phi23 = canonical_purification(sigma);

  Vec flag(2);
  flag << std::sqrt(p), std::sqrt(1.0 - p);
  iso.env = kron_vec(iso.phi23, flag);

  const std::int64_t dim = 2 * static_cast<std::int64_t>(d) * d * d;
  require_capacity(dim, "general_isometry");
  Mat u = Mat::Zero(dim, dim);
  for (int i1 = 0; i1 < d; ++i1)
    for (int i2 = 0; i2 < d; ++i2)
      for (int i3 = 0; i3 < d; ++i3) {
        const std::int64_t col0 = ((static_cast<std::int64_t>(i1) * d + i2) * d + i3) * 2;
        u(col0, col0) = 1.0;  // flag 0: identity
        const std::int64_t col1 = col0 + 1;
        const std::int64_t row1 =
            ((static_cast<std::int64_t>(i2) * d + i1) * d + i3) * 2 + 1;
        u(row1, col1) = 1.0;  // flag 1: swap systems 1 and 2
      }
  iso.U = std::move(u);
  return iso;
}

// Joint output U (rho_1 (x) |env><env|) U^dag on systems (1,2,3,4).
inline Mat iso_full_output(const IsometryModel& iso, const Mat& rho) {
  require(rho.rows() == iso.d && rho.cols() == iso.d,
          "iso_full_output: input dimension mismatch");
  Mat joint = kron(rho, iso.env * iso.env.adjoint());
  return iso.U * joint * iso.U.adjoint();
}

// Eve's marginal Tr_234 of the joint output; equals p rho + (1-p) sigma.
inline Mat eve_output(const IsometryModel& iso, const Mat& rho) {
  return partial_trace(iso_full_output(iso, rho), iso.full_dims(), {1, 2, 3});
}

// Bob's marginal Tr_1 of the joint output, on systems (2,3,4): the three-term
// expression with the sqrt(p(1-p)) coherence terms.
inline Mat bob_output_general(const IsometryModel& iso, const Mat& rho) {
  return partial_trace(iso_full_output(iso, rho), iso.full_dims(), {0});
}

// Complete dephasing of the flag qubit of Bob's output, followed by the fixed
// isomorphism onto the (d+1)-dimensional erasure output: the flag-1 branch
// keeps the slot-2 qudit (slot 3 traced out) in the first d dimensions, the
// flag-0 branch collapses to the erasure symbol |d>. The result equals
// erasure_channel(d, p) applied to rho, independently of sigma.
inline Mat dephase_flag(const IsometryModel& iso, const Mat& rho) {
  Mat bob = bob_output_general(iso, rho);
  const int d = iso.d;
  // zero the cross-flag coherences, i.e. keep i4 == j4 blocks only
  const std::int64_t bd = 2 * static_cast<std::int64_t>(d) * d;
  for (std::int64_t r = 0; r < bd; ++r)
    for (std::int64_t c = 0; c < bd; ++c)
      if ((r & 1) != (c & 1)) bob(r, c) = 0.0;
  Mat out = Mat::Zero(d + 1, d + 1);
  // flag-1 branch: keep slot 2, trace slot 3
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Cplx sum = 0.0;
      for (int k = 0; k < d; ++k)
        sum += bob((static_cast<std::int64_t>(i) * d + k) * 2 + 1,
                   (static_cast<std::int64_t>(j) * d + k) * 2 + 1);
      out(i, j) = sum;
    }
  // flag-0 branch: total weight to the erasure symbol
  Cplx w = 0.0;
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      w += bob((static_cast<std::int64_t>(i) * d + k) * 2,
               (static_cast<std::int64_t>(i) * d + k) * 2);
  out(d, d) = w;
  return out;
}

// ---------------------------------------------------------------------------
// Choi matrix and CPTP validation

inline Mat choi_matrix(const ChannelModel& ch) {
  const std::int64_t din = ch.input_dim, dout = ch.output_dim;
  const std::int64_t dim = din * dout;
  require_capacity(dim, "choi_matrix");
  Mat choi = Mat::Zero(dim, dim);
  for (const Mat& k : ch.kraus) {
    Vec v(dim);  // v = sum_i |i> (x) K|i>
    for (std::int64_t i = 0; i < din; ++i) v.segment(i * dout, dout) = k.col(i);
    choi.noalias() += v * v.adjoint();
  }
  return choi;
}

struct CptpReport {
  double tp_residual = 0.0;   // || sum K^dag K - I ||_max
  double choi_min_eig = 0.0;  // smallest Choi eigenvalue
  bool trace_preserving = false;
  bool completely_positive = false;
  bool pass = false;

  std::string to_kv() const {
    std::ostringstream out;
    out.precision(17);
    out << "tp_residual=" << tp_residual << "\n"
        << "choi_min_eig=" << choi_min_eig << "\n"
        << "trace_preserving=" << (trace_preserving ? 1 : 0) << "\n"
        << "completely_positive=" << (completely_positive ? 1 : 0) << "\n"
        << "pass=" << (pass ? 1 : 0) << "\n";
    return out.str();
  }
};

// Violations are reported, not thrown.
inline CptpReport cptp_check(const ChannelModel& ch) {
  CptpReport rep;
  Mat acc = Mat::Zero(ch.input_dim, ch.input_dim);
  for (const Mat& k : ch.kraus) acc.noalias() += k.adjoint() * k;
  acc -= Mat::Identity(ch.input_dim, ch.input_dim);
  rep.tp_residual = max_abs(acc);
  Eigen::SelfAdjointEigenSolver<Mat> es(choi_matrix(ch), Eigen::EigenvaluesOnly);
  rep.choi_min_eig = es.eigenvalues().minCoeff();
  rep.trace_preserving = rep.tp_residual <= 1e-9;
  rep.completely_positive = rep.choi_min_eig >= -1e-9;
  rep.pass = rep.trace_preserving && rep.completely_positive;
  return rep;
}

// ---------------------------------------------------------------------------
// CLI channel specs: "noiseless", "erasure:<p>", "depolarizing:<p>",
// "pconvex:<p>" (sigma defaults to I/d).

enum class ChannelKind { kNoiseless, kErasure, kDepolarizing, kPConvex };

struct ChannelSpec {
  ChannelKind kind = ChannelKind::kNoiseless;
  double p = 0.0;  // family parameter of the section-V channels
};

inline ChannelSpec parse_channel_spec(const std::string& text) {
  ChannelSpec spec;
  auto colon = text.find(':');
  std::string name = text.substr(0, colon);
  if (name == "noiseless") {
    require(colon == std::string::npos, "channel spec: noiseless takes no parameter");
    return spec;
  }
  require(colon != std::string::npos && colon + 1 < text.size(),
          "channel spec: expected <kind>:<p>");
  double p = 0.0;
  try {
    p = std::stod(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("channel spec: bad parameter in '" + text + "'");
  }
  require(p >= 0.0 && p <= 1.0, "channel spec: p outside [0, 1]");
  spec.p = p;
  if (name == "erasure")
    spec.kind = ChannelKind::kErasure;
  else if (name == "depolarizing")
    spec.kind = ChannelKind::kDepolarizing;
  else if (name == "pconvex")
    spec.kind = ChannelKind::kPConvex;
  else
    throw std::invalid_argument("channel spec: unknown kind '" + name + "'");
  return spec;
}

}  // namespace qdl
