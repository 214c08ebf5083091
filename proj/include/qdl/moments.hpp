// Analytic moments of the overlap statistic q under product-Haar locking
// unitaries, tail-bound evaluators (Maurer, operator Chernoff), empirical
// violation experiments, and the key-length threshold calculators.

#pragma once

#include "qdl/codebook.hpp"
#include "qdl/common.hpp"
#include "qdl/info.hpp"
#include "qdl/parallel.hpp"
#include "qdl/rng.hpp"
#include "qdl/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qdl {

// Second-moment ratio gamma = 2d / (d + 1); log2(gamma) = 1 - log2(1 + 1/d).
inline double gamma_factor(int d) {
  require(d >= 2, "gamma_factor: d must be >= 2");
  return 2.0 * d / (d + 1.0);
}

struct MomentReport {
  int d = 0;
  int n = 0;
  // E[q] = d^{-n}; E[q^2] <= gamma^n / d^{2n}, with equality for product phi.
  double analytic_first = 0.0;
  double analytic_second_bound = 0.0;
  double log2_analytic_first = 0.0;
  double log2_analytic_second_bound = 0.0;
  double mc_first = 0.0;
  double mc_first_stderr = 0.0;
  double mc_second = 0.0;
  double mc_second_stderr = 0.0;
  std::int64_t trials = 0;

  std::string to_kv() const {
    std::ostringstream out;
    out.precision(17);
    out << "d=" << d << "\nn=" << n << "\n"
        << "analytic_first=" << analytic_first << "\n"
        << "analytic_second_bound=" << analytic_second_bound << "\n"
        << "mc_first=" << mc_first << "\n"
        << "mc_first_stderr=" << mc_first_stderr << "\n"
        << "mc_second=" << mc_second << "\n"
        << "mc_second_stderr=" << mc_second_stderr << "\n"
        << "trials=" << trials << "\n";
    return out.str();
  }

  static std::string csv_header() {
    return "d,n,analytic_first,analytic_second_bound,mc_first,"
           "mc_first_stderr,mc_second,mc_second_stderr,trials";
  }

  std::string csv_row() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%lld",
                  d, n, analytic_first, analytic_second_bound, mc_first,
                  mc_first_stderr, mc_second, mc_second_stderr,
                  static_cast<long long>(trials));
    return buf;
  }
};

// Analytic fields only; computed in log space first so that large n cannot
// underflow silently.
inline MomentReport analytic_moments(int d, int n) {
  require(d >= 2 && n >= 1, "analytic_moments: need d >= 2, n >= 1");
  MomentReport r;
  r.d = d;
  r.n = n;
  const double log2d = std::log2(static_cast<double>(d));
  r.log2_analytic_first = -n * log2d;
  r.log2_analytic_second_bound = n * (std::log2(gamma_factor(d)) - 2.0 * log2d);
  r.analytic_first = std::exp2(r.log2_analytic_first);
  r.analytic_second_bound = std::exp2(r.log2_analytic_second_bound);
  return r;
}

enum class PhiMode {
  kProduct,  // random product state: the second-moment bound is tight
  kRandom,   // random state of the full d^n space
};

// Monte Carlo estimates of E[q] and E[q^2] for q = |<phi| (x)_j U_j |psi>|^2
// over i.i.d. product-Haar unitaries, with fixed phi and psi drawn once from
// the stream. Trials are independent streams, so results do not depend on
// the thread count.
inline MomentReport mc_moments(int d, int n, std::int64_t trials,
                               RngStream& rng,
                               PhiMode phi_mode = PhiMode::kProduct) {
  require(trials >= 100, "mc_moments: trials must be >= 100");
  MomentReport r = analytic_moments(d, n);
  r.trials = trials;
  const std::uint64_t seed = rng.base_seed();

  RngStream setup = rng.child(stream_tag::kPhi);
  std::vector<Vec> psi(n);
  for (int j = 0; j < n; ++j) psi[j] = random_unit_vec(d, setup);
  std::vector<Vec> phi_factors;
  Vec phi_full;
  if (phi_mode == PhiMode::kProduct) {
    phi_factors.resize(n);
    for (int j = 0; j < n; ++j) phi_factors[j] = random_unit_vec(d, setup);
  } else {
    phi_full = random_unit_vec(pow_dim(d, n, "mc_moments"), setup);
  }

  std::vector<double> q(trials);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    RngStream s = RngStream::derive(seed, stream_tag::kTrial, t);
    if (phi_mode == PhiMode::kProduct) {
      Cplx amp = 1.0;
      for (int j = 0; j < n; ++j)
        amp *= phi_factors[j].dot(haar_unitary(d, s).m * psi[j]);
      q[t] = std::norm(amp);
    } else {
      Vec v = haar_unitary(d, s).m * psi[0];
      for (int j = 1; j < n; ++j) v = kron_vec(v, haar_unitary(d, s).m * psi[j]);
      q[t] = std::norm(phi_full.dot(v));
    }
  });

  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (double x : q) {
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  const double nt = static_cast<double>(trials);
  r.mc_first = s1 / nt;
  r.mc_second = s2 / nt;
  r.mc_first_stderr =
      std::sqrt(std::max(0.0, s2 / nt - r.mc_first * r.mc_first) / nt);
  r.mc_second_stderr =
      std::sqrt(std::max(0.0, s4 / nt - r.mc_second * r.mc_second) / nt);
  return r;
}

// Probability bound with its log; `vacuous` flags a raw value above 1
// (reported as-is, never silently clipped).
struct TailBound {
  double value = 0.0;
  double log2_value = 0.0;
  bool vacuous = false;
};

namespace detail {
inline TailBound make_bound_from_ln(double ln_value) {
  TailBound b;
  b.log2_value = ln_value / kLn2;
  b.value = std::exp(ln_value);
  b.vacuous = ln_value > 0.0;
  return b;
}
}  // namespace detail

// Lower-tail bound for the mean of T i.i.d. nonnegative variables:
//   Pr{ mean < E[X] - tau } <= exp(-T tau^2 / (2 E[X^2])).
inline TailBound maurer_tail_bound(std::int64_t T, double tau,
                                   double second_moment) {
  require(T >= 1, "maurer_tail_bound: T must be >= 1");
  require(tau > 0.0, "maurer_tail_bound: tau must be > 0");
  require(second_moment > 0.0, "maurer_tail_bound: E[X^2] must be > 0");
  return detail::make_bound_from_ln(-static_cast<double>(T) * tau * tau /
                                    (2.0 * second_moment));
}

// Operator Chernoff bound for i.i.d. Hermitian 0 <= X_t <= I with
// E[X_t] = mu I in dimension D:
//   Pr{ mean not<= (1+tau) mu I } <= D exp(-T tau^2 mu / (4 ln 2)),
// valid under the hypothesis (1 + tau) mu <= 1.
inline TailBound chernoff_operator_bound(std::int64_t T, double tau, double mu,
                                         std::int64_t D) {
  require(T >= 1, "chernoff_operator_bound: T must be >= 1");
  require(tau > 0.0, "chernoff_operator_bound: tau must be > 0");
  require(mu > 0.0, "chernoff_operator_bound: mu must be > 0");
  require(D >= 1, "chernoff_operator_bound: D must be >= 1");
  require((1.0 + tau) * mu <= 1.0,
          "chernoff_operator_bound: hypothesis (1+tau)mu <= 1 fails");
  const double ln_value =
      std::log(static_cast<double>(D)) -
      static_cast<double>(T) * tau * tau * mu / (4.0 * kLn2);
  return detail::make_bound_from_ln(ln_value);
}

// ---------------------------------------------------------------------------
// Key-length thresholds

struct WeakParams {
  double p = 1.0;
  double delta = 0.0;
};

struct KeyThresholdReport {
  int d = 0;
  int n = 0;
  std::int64_t M = 0;
  double epsilon = 0.0;
  // sampling branch: 2 gamma^m (eps^-2 ln M + c_net), with
  //   strong: m = n,        c_net = 2 eps^-3 ln(5/eps)
  //   weak:   m = n(p+dlt), c_net = 2 eps^-4 ln(5/eps)
  double branch_sampling = 0.0;
  // Chernoff branch: (d^m / M) 4 ln2 ln(d^m) / eps^2
  double branch_chernoff = 0.0;
  double log2_branch_sampling = 0.0;
  double log2_branch_chernoff = 0.0;
  std::uint64_t K_min = 1;
  double log2_K_min = 0.0;
  std::optional<double> weak_p;
  std::optional<double> weak_delta;
  bool delta_defaulted = false;  // weak case ran with the delta -> 0 default

  std::string to_kv() const {
    std::ostringstream out;
    out.precision(17);
    out << "d=" << d << "\nn=" << n << "\nM=" << M << "\nepsilon=" << epsilon
        << "\n"
        << "branch_sampling=" << branch_sampling << "\n"
        << "branch_chernoff=" << branch_chernoff << "\n"
        << "log2_branch_sampling=" << log2_branch_sampling << "\n"
        << "log2_branch_chernoff=" << log2_branch_chernoff << "\n"
        << "K_min=" << K_min << "\n"
        << "log2_K_min=" << log2_K_min << "\n";
    if (weak_p) out << "weak_p=" << *weak_p << "\n";
    if (weak_delta) out << "weak_delta=" << *weak_delta << "\n";
    if (delta_defaulted) out << "delta_defaulted=1\n";
    return out.str();
  }

  static std::string csv_header() {
    return "d,n,M,epsilon,branch_sampling,branch_chernoff,K_min,log2_K_min,"
           "weak_p,weak_delta";
  }

  std::string csv_row() const {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%d,%d,%lld,%.9g,%.9g,%.9g,%llu,%.9g",
                  d, n, static_cast<long long>(M), epsilon, branch_sampling,
                  branch_chernoff, static_cast<unsigned long long>(K_min),
                  log2_K_min);
    std::string row = buf;
    row += weak_p ? "," + std::to_string(*weak_p) : ",";
    row += weak_delta ? "," + std::to_string(*weak_delta) : ",";
    return row;
  }
};

// Sufficient key-set size: K_min = ceil(max of the two branches). The weak
// variant replaces n by the effective length n(p + delta) and uses the
// 2/eps^4 net term; note the exponent differs from the strong case's
// 2/eps^3 (both are implemented as printed in their respective conditions).
inline KeyThresholdReport key_threshold(
    int d, int n, std::int64_t M, double epsilon,
    const std::optional<WeakParams>& weak = std::nullopt) {
  require(d >= 2 && n >= 1 && M >= 1, "key_threshold: bad dimensions");
  require(epsilon > 0.0 && epsilon < 1.0, "key_threshold: epsilon outside (0, 1)");

  KeyThresholdReport r;
  r.d = d;
  r.n = n;
  r.M = M;
  r.epsilon = epsilon;

  double m = static_cast<double>(n);
  double net_term = 2.0 / std::pow(epsilon, 3) * std::log(5.0 / epsilon);
  if (weak) {
    require(weak->p >= 0.0 && weak->p <= 1.0, "key_threshold: weak p outside [0, 1]");
    require(weak->delta >= 0.0, "key_threshold: weak delta must be >= 0");
    r.weak_p = weak->p;
    r.weak_delta = weak->delta;
    r.delta_defaulted = weak->delta == 0.0;
    m = n * (weak->p + weak->delta);
    net_term = 2.0 / std::pow(epsilon, 4) * std::log(5.0 / epsilon);
  }

  const double ln_gamma = std::log(gamma_factor(d));
  const double ln_d = std::log(static_cast<double>(d));
  const double lnM = std::log(static_cast<double>(M));

  // sampling branch, in log space
  const double inner = lnM / (epsilon * epsilon) + net_term;
  const double ln_sampling = std::log(2.0) + m * ln_gamma + std::log(inner);
  r.log2_branch_sampling = ln_sampling / kLn2;
  r.branch_sampling = std::exp(ln_sampling);

  // Chernoff branch, in log space; ln(d^m) = m ln d
  const double ln_chern = m * ln_d - lnM +
                          std::log(4.0 * kLn2 * std::max(m * ln_d, 1e-300)) -
                          2.0 * std::log(epsilon);
  r.log2_branch_chernoff = ln_chern / kLn2;
  r.branch_chernoff = std::exp(ln_chern);

  const double kmax = std::max(r.branch_sampling, r.branch_chernoff);
  require(kmax < 9e18, "key_threshold: K_min overflows integer range");
  r.K_min = static_cast<std::uint64_t>(std::max(1.0, std::ceil(kmax)));
  r.log2_K_min = std::log2(static_cast<double>(r.K_min));
  return r;
}

// ---------------------------------------------------------------------------
// Empirical violation experiments

struct ConcentrationExperiment {
  int d = 2;
  int n = 1;
  int K = 1;
  int M = 1;
  double epsilon = 0.1;
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;

  std::int64_t ell() const {
    return static_cast<std::int64_t>(std::ceil(epsilon * M));
  }

  void validate() const {
    require(d >= 2 && n >= 1 && K >= 1 && M >= 1 && trials >= 1,
            "ConcentrationExperiment: bad dimensions");
    require(epsilon > 0.0 && epsilon < 1.0,
            "ConcentrationExperiment: epsilon outside (0, 1)");
    require(ell() <= M, "ConcentrationExperiment: ell exceeds M");
    require(pow_dim(d, n, "ConcentrationExperiment") <= 256,
            "ConcentrationExperiment: d^n above desk-scale cap 256");
  }
};

enum class ViolationEvent {
  // Q_c(phi) < (1 - eps) / d^n for fixed phi, c over a fresh locking set:
  //   bound exp(-K eps^2 / (2 gamma^n)).
  kLowerTail,
  // max_c lambda_max((1/K) sum_s |psi_c^(s)><psi_c^(s)|) > 1 - eps:
  //   bound M d^n exp(-K d^n (1 - eps - 1/d^n)^2 / (4 ln 2)).
  kUpperOperator,
  // spectrum of (1/MK) sum_{c,s} |psi_c^(s)><psi_c^(s)| leaves
  // [(1-eps)/d^n, (1+eps)/d^n] (equivalently max_phi sum_c Q_c(phi) leaves
  // the window [(1-eps)M/d^n, (1+eps)M/d^n]):
  //   bound 2 d^n exp(-K M eps^2 / (d^n 4 ln 2)).
  kSumWindow,
};

struct ViolationResult {
  double observed = 0.0;
  double observed_stderr = 0.0;
  double bound = 0.0;
  bool bound_vacuous = false;
  std::int64_t trials = 0;
};

inline ViolationResult empirical_violation_rate(
    const ConcentrationExperiment& exp, ViolationEvent event, RngStream& rng) {
  exp.validate();
  const std::int64_t dim = pow_dim(exp.d, exp.n, "empirical_violation_rate");
  const double dn = static_cast<double>(dim);
  const std::uint64_t seed = rng.base_seed();

  double ln_bound = 0.0;
  switch (event) {
    case ViolationEvent::kLowerTail:
      ln_bound = -exp.K * exp.epsilon * exp.epsilon /
                 (2.0 * std::pow(gamma_factor(exp.d), exp.n));
      break;
    case ViolationEvent::kUpperOperator: {
      const double gap = 1.0 - exp.epsilon - 1.0 / dn;
      require(gap > 0.0,
              "empirical_violation_rate: upper-operator event needs "
              "1 - eps - 1/d^n > 0");
      ln_bound = std::log(static_cast<double>(exp.M) * dn) -
                 exp.K * dn * gap * gap / (4.0 * kLn2);
      break;
    }
    case ViolationEvent::kSumWindow:
      ln_bound = std::log(2.0 * dn) - static_cast<double>(exp.K) * exp.M *
                                          exp.epsilon * exp.epsilon /
                                          (dn * 4.0 * kLn2);
      break;
  }

  // Fixed phi and codebook; the randomness per trial is the locking set
  // (and, for the collective events, a fresh codebook as well).
  RngStream setup = rng.child(stream_tag::kPhi);
  const Vec phi = random_unit_vec(dim, setup);

  std::vector<std::uint8_t> bad(exp.trials, 0);
  parallel_for(static_cast<std::size_t>(exp.trials), [&](std::size_t t) {
    RngStream s = RngStream::derive(seed, stream_tag::kTrial, t);
    switch (event) {
      case ViolationEvent::kLowerTail: {
        RngStream cbs = s.child(stream_tag::kCodebook);
        Codebook cb = sample_codebook(exp.d, exp.n, 1, Ensemble::kHaarPure, cbs);
        LockingSet ls = sample_locking_set(exp.d, exp.n, exp.K, s);
        double q = q_vector(phi, cb, ls).values[0];
        bad[t] = q < (1.0 - exp.epsilon) / dn ? 1 : 0;
        break;
      }
      case ViolationEvent::kUpperOperator: {
        RngStream cbs = s.child(stream_tag::kCodebook);
        Codebook cb =
            sample_codebook(exp.d, exp.n, exp.M, Ensemble::kHaarPure, cbs);
        LockingSet ls = sample_locking_set(exp.d, exp.n, exp.K, s);
        bool hit = false;
        for (int c = 0; c < exp.M && !hit; ++c) {
          Mat a = eve_marginal(cb, ls, c);
          Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
          hit = es.eigenvalues().maxCoeff() > 1.0 - exp.epsilon;
        }
        bad[t] = hit ? 1 : 0;
        break;
      }
      case ViolationEvent::kSumWindow: {
        RngStream cbs = s.child(stream_tag::kCodebook);
        Codebook cb =
            sample_codebook(exp.d, exp.n, exp.M, Ensemble::kHaarPure, cbs);
        LockingSet ls = sample_locking_set(exp.d, exp.n, exp.K, s);
        Mat avg = Mat::Zero(dim, dim);
        for (int c = 0; c < exp.M; ++c) avg += eve_marginal(cb, ls, c);
        avg /= exp.M;
        Eigen::SelfAdjointEigenSolver<Mat> es(avg, Eigen::EigenvaluesOnly);
        bad[t] = (es.eigenvalues().maxCoeff() > (1.0 + exp.epsilon) / dn ||
                  es.eigenvalues().minCoeff() < (1.0 - exp.epsilon) / dn)
                     ? 1
                     : 0;
        break;
      }
    }
  });

  std::int64_t hits = 0;
  for (std::uint8_t b : bad) hits += b;
  ViolationResult res;
  res.trials = exp.trials;
  res.observed = static_cast<double>(hits) / exp.trials;
  res.observed_stderr =
      std::sqrt(res.observed * (1.0 - res.observed) / exp.trials);
  TailBound tb = detail::make_bound_from_ln(ln_bound);
  res.bound = tb.value;
  res.bound_vacuous = tb.vacuous;
  return res;
}

}  // namespace qdl
