// Closed-form rate and key-consumption formulas for the channel family,
// numerical coherent information, and the rate-curve generator behind the
// erasure / conjugate-depolarizing comparison figures.

#pragma once

#include "qdl/channels.hpp"
#include "qdl/common.hpp"
#include "qdl/info.hpp"
#include "qdl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

namespace qdl {

// f(p, D) = -(p + (1-p)/D) log2(p + (1-p)/D) - (D-1) (1-p)/D log2((1-p)/D);
// the p = 0 and p = 1 limits are exact (log2 D and 0).
inline double f_entropy(double p, std::int64_t D) {
  require(p >= 0.0 && p <= 1.0, "f_entropy: p outside [0, 1]");
  require(D >= 2, "f_entropy: D must be >= 2");
  const double tail = (1.0 - p) / static_cast<double>(D);
  return neg_xlog2x(p + tail) + (D - 1) * neg_xlog2x(tail);
}

// Maximum achievable rate through the conjugate-depolarizing channel to Bob
// under the uniform basis-state ensemble: f(p, d^2) - f(p, d).
inline double dep_achievable_rate(int d, double p) {
  require(d >= 2, "dep_achievable_rate: d must be >= 2");
  return f_entropy(p, static_cast<std::int64_t>(d) * d) - f_entropy(p, d);
}

// Strong-locking key consumption: max{1 - log2(1 + 1/d), log2 d - R}.
inline double strong_key_rate(int d, double R) {
  require(d >= 2, "strong_key_rate: d must be >= 2");
  const double log2d = std::log2(static_cast<double>(d));
  require(R >= 0.0 && R <= log2d + 1e-12, "strong_key_rate: R outside [0, log2 d]");
  return std::max(1.0 - std::log2(1.0 + 1.0 / d), log2d - R);
}

// Weak-locking key consumption: max{p (1 - log2(1 + 1/d)), p log2 d - R}.
inline double weak_key_rate(int d, double p, double R) {
  require(d >= 2, "weak_key_rate: d must be >= 2");
  require(p >= 0.0 && p <= 1.0, "weak_key_rate: p outside [0, 1]");
  require(R >= 0.0, "weak_key_rate: R must be >= 0");
  return std::max(p * (1.0 - std::log2(1.0 + 1.0 / d)),
                  p * std::log2(static_cast<double>(d)) - R);
}

struct ErasureRates {
  double R = 0.0;     // achievable communication rate (1-p) log2 d
  double k = 0.0;     // key consumption rate
  double R_wl = 0.0;  // bootstrap weak-locking rate max(0, R - k)
  double P = 0.0;     // erasure private capacity max(0, (1-2p) log2 d)
  double C = 0.0;     // erasure classical capacity (1-p) log2 d
};

// The private and classical erasure capacities are standard baselines, not
// derived here; they anchor the comparison curves.
inline ErasureRates erasure_rates(int d, double p) {
  require(d >= 2, "erasure_rates: d must be >= 2");
  require(p >= 0.0 && p <= 1.0, "erasure_rates: p outside [0, 1]");
  const double log2d = std::log2(static_cast<double>(d));
  ErasureRates r;
  r.R = (1.0 - p) * log2d;
  r.k = std::max(p * (1.0 - std::log2(1.0 + 1.0 / d)), (2.0 * p - 1.0) * log2d);
  r.R_wl = std::max(0.0, r.R - r.k);
  r.P = std::max(0.0, (1.0 - 2.0 * p) * log2d);
  r.C = (1.0 - p) * log2d;
  return r;
}

struct DepRates {
  double R = 0.0;        // f(p, d^2) - f(p, d)
  double k = 0.0;        // key consumption rate
  double R_wl = 0.0;     // max(0, R - k)
  double hashing = 0.0;  // coherent information at the maximally mixed input
  double achievable = 0.0;  // = R; plotted in place of an unknown capacity
};

namespace detail {
// Output blocks of the conjugate-depolarizing Bob channel for a diagonal
// input diag(r): the output is block diagonal in a, with block (b, b') =
// sqrt(q_ab q_ab') sum_j r_j w^{j (b - b')}. Exploiting this keeps the d = 64
// figure affordable.
inline std::vector<Mat> conj_dep_bob_diag_blocks(int d, double p,
                                                 const RealVec& rdiag) {
  const double theta = 2.0 * std::numbers::pi / d;
  std::vector<Cplx> corr(d);  // corr[m] = sum_j r_j w^{j m}
  for (int m = 0; m < d; ++m) {
    Cplx acc = 0.0;
    for (int j = 0; j < d; ++j) acc += rdiag[j] * std::polar(1.0, theta * j * m);
    corr[m] = acc;
  }
  std::vector<Mat> blocks;
  blocks.reserve(d);
  for (int a = 0; a < d; ++a) {
    Mat blk(d, d);
    for (int b = 0; b < d; ++b)
      for (int bp = 0; bp < d; ++bp) {
        const int m = (b - bp + d) % d;
        blk(b, bp) = std::sqrt(conj_dep_weight(d, p, a, b) *
                               conj_dep_weight(d, p, a, bp)) *
                     corr[m];
      }
    blocks.push_back(std::move(blk));
  }
  return blocks;
}

inline double entropy_of_blocks(const std::vector<Mat>& blocks) {
  double h = 0.0;
  for (const Mat& blk : blocks) {
    Eigen::SelfAdjointEigenSolver<Mat> es(blk, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      double lam = es.eigenvalues()[i];
      if (lam > kEigClipTol) h += neg_xlog2x(lam);
    }
  }
  return h;
}
}  // namespace detail

// Coherent information of the Bob channel at the maximally mixed input,
// H(N_B(I/d)) - H(N_E(I/d)), computed from the block structure of the Bob
// output (the Eve output at I/d is I/d itself). Signed; clipping happens at
// curve-assembly level only.
inline double dep_hashing_bound(int d, double p) {
  require(d >= 2, "dep_hashing_bound: d must be >= 2");
  require(p >= 0.0 && p <= 1.0, "dep_hashing_bound: p outside [0, 1]");
  RealVec mixed = RealVec::Constant(d, 1.0 / d);
  const double hb =
      detail::entropy_of_blocks(detail::conj_dep_bob_diag_blocks(d, p, mixed));
  const double he = von_neumann_entropy(Mat::Identity(d, d) / d);
  return hb - he;
}

inline DepRates dep_rates(int d, double p) {
  require(d >= 2, "dep_rates: d must be >= 2");
  require(p >= 0.0 && p <= 1.0, "dep_rates: p outside [0, 1]");
  DepRates r;
  r.R = dep_achievable_rate(d, p);
  r.k = std::max(p * (1.0 - std::log2(1.0 + 1.0 / d)),
                 p * std::log2(static_cast<double>(d)) - r.R);
  r.R_wl = std::max(0.0, r.R - r.k);
  r.hashing = dep_hashing_bound(d, p);
  r.achievable = r.R;
  return r;
}

// Bootstrap through a channel with private capacity P > 0: R / (1 + k/P).
inline double bootstrap_rate_private(double R, double k, double P) {
  require(R >= 0.0 && k >= 0.0, "bootstrap_rate_private: R, k must be >= 0");
  if (P <= 0.0)
    throw std::invalid_argument(
        "bootstrap_rate_private: channel has zero private capacity; use the "
        "recycling variant");
  return R / (1.0 + k / P);
}

// Bootstrap by key recycling: R - k, defined for R >= k.
inline double bootstrap_recycle_rate(double R, double k) {
  require(k >= 0.0, "bootstrap_recycle_rate: k must be >= 0");
  if (R < k)
    throw std::invalid_argument(
        "bootstrap_recycle_rate: R < k, protocol cannot self-sustain");
  return R - k;
}

// ---------------------------------------------------------------------------
// Numerical coherent information for an explicit complementary channel pair

namespace detail {
// Output of the canonical complement of `ch` (built from its Kraus set) on
// input rho: entry (k, l) = Tr(K_k rho K_l^dag).
inline Mat canonical_complement_output(const ChannelModel& ch, const Mat& rho) {
  const std::size_t nk = ch.kraus.size();
  Mat out(nk, nk);
  for (std::size_t k = 0; k < nk; ++k)
    for (std::size_t l = 0; l < nk; ++l)
      out(k, l) = (ch.kraus[k] * rho * ch.kraus[l].adjoint()).trace();
  return out;
}

inline std::vector<double> sorted_spectrum(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  std::vector<double> s(es.eigenvalues().data(),
                        es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(s.begin(), s.end(), std::greater<double>());
  return s;
}
}  // namespace detail

// H(bob(rho)) - H(eve(rho)) in bits. The pair is validated as complementary
// by checking, on fixed pseudo-random pure probes, that eve's output spectrum
// matches the spectrum of the canonical complement built from bob's Kraus
// operators (equivalently, that the joint output on pure inputs is pure).
inline double coherent_information(const ChannelModel& bob,
                                   const ChannelModel& eve, const Mat& rho) {
  require(bob.input_dim == eve.input_dim,
          "coherent_information: input dimensions differ");
  require(rho.rows() == bob.input_dim && is_density_matrix(rho, 1e-8),
          "coherent_information: rho is not a density matrix");
  RngStream probes(0xC01DBEEF);
  for (int t = 0; t < 3; ++t) {
    Vec psi = random_unit_vec(bob.input_dim, probes);
    Mat pure = psi * psi.adjoint();
    std::vector<double> a =
        detail::sorted_spectrum(detail::canonical_complement_output(bob, pure));
    std::vector<double> b = detail::sorted_spectrum(eve.apply(pure));
    const std::size_t len = std::max(a.size(), b.size());
    a.resize(len, 0.0);
    b.resize(len, 0.0);
    for (std::size_t i = 0; i < len; ++i)
      require(std::abs(a[i] - b[i]) <= 1e-8,
              "coherent_information: channels fail the complementarity check");
  }
  return von_neumann_entropy(bob.apply(rho)) - von_neumann_entropy(eve.apply(rho));
}

// ---------------------------------------------------------------------------
// Rate curves

struct RateSeries {
  std::string name;
  std::vector<double> values;
  // 1 where a negative raw value was clipped to 0 (bytes, not vector<bool>:
  // slots are written concurrently during curve assembly)
  std::vector<std::uint8_t> clipped;
};

struct RateCurve {
  std::string channel_kind;
  int d = 2;
  std::vector<double> grid;
  std::vector<RateSeries> series;

  const RateSeries& find(const std::string& name) const {
    for (const RateSeries& s : series)
      if (s.name == name) return s;
    throw std::invalid_argument("RateCurve: no series named " + name);
  }
};

namespace detail {
inline void set_point(RateSeries& s, std::size_t i, double raw) {
  s.clipped[i] = raw < 0.0;
  s.values[i] = std::max(0.0, raw);
}
}  // namespace detail

// Uniform p grid over [0, 1]; grid points evaluated in parallel with a fixed
// assembly order. Series (and the CSV column order):
//   erasure:      weak_locking, private_capacity, classical_capacity
//   depolarizing: weak_locking, hashing_bound, achievable_rate
inline RateCurve rate_curve(const std::string& channel_kind, int d,
                            int grid_points) {
  require(grid_points >= 2, "rate_curve: grid_points must be >= 2");
  require(d >= 2, "rate_curve: d must be >= 2");
  const bool erasure = channel_kind == "erasure";
  if (!erasure && channel_kind != "depolarizing")
    throw std::invalid_argument("rate_curve: unknown channel kind '" +
                                channel_kind + "'");
  RateCurve curve;
  curve.channel_kind = channel_kind;
  curve.d = d;
  curve.grid.resize(grid_points);
  for (int i = 0; i < grid_points; ++i)
    curve.grid[i] = static_cast<double>(i) / (grid_points - 1);

  curve.series = erasure ? std::vector<RateSeries>{{"weak_locking", {}, {}},
                                                   {"private_capacity", {}, {}},
                                                   {"classical_capacity", {}, {}}}
                         : std::vector<RateSeries>{{"weak_locking", {}, {}},
                                                   {"hashing_bound", {}, {}},
                                                   {"achievable_rate", {}, {}}};
  for (RateSeries& s : curve.series) {
    s.values.resize(grid_points);
    s.clipped.resize(grid_points);
  }

  parallel_for(static_cast<std::size_t>(grid_points), [&](std::size_t i) {
    const double p = curve.grid[i];
    if (erasure) {
      ErasureRates r = erasure_rates(d, p);
      detail::set_point(curve.series[0], i, r.R - r.k);
      detail::set_point(curve.series[1], i,
                        (1.0 - 2.0 * p) * std::log2(double(d)));
      detail::set_point(curve.series[2], i, r.C);
    } else {
      DepRates r = dep_rates(d, p);
      detail::set_point(curve.series[0], i, r.R - r.k);
      detail::set_point(curve.series[1], i, r.hashing);
      detail::set_point(curve.series[2], i, r.achievable);
    }
  });
  return curve;
}

// Fixed CSV schema; floating point at 9 significant digits.
inline std::string rate_curve_csv(const RateCurve& curve) {
  std::string out = "p";
  for (const RateSeries& s : curve.series) out += "," + s.name;
  out += "\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g", curve.grid[i]);
    out += buf;
    for (const RateSeries& s : curve.series) {
      std::snprintf(buf, sizeof(buf), ",%.9g", s.values[i]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace qdl
