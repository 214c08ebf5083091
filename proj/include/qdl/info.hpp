// Entropy functionals, the accessible-information upper bound, the sphere
// minimization of H[Q(phi)] - eta[sum_c Q_c(phi)], and measurement-specific
// lower bounds (POVMs, pretty-good measurement).
//
// All entropies are in bits (base-2 logarithms).

#pragma once

#include "qdl/codebook.hpp"
#include "qdl/common.hpp"
#include "qdl/parallel.hpp"
#include "qdl/rng.hpp"
#include "qdl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace qdl {

inline constexpr double kLn2 = std::numbers::ln2;

// -x log2 x extended to all x >= 0 (negative for x > 1); 0 at x = 0.
inline double neg_xlog2x(double x) {
  if (x <= 0.0) return 0.0;
  return -x * std::log2(x);
}

// eta(x) = -x log2 x on [0, 1], with eta(0) = 0.
inline double eta(double x) {
  require(x >= 0.0 && x <= 1.0, "eta: argument outside [0, 1]");
  return neg_xlog2x(x);
}

// Shannon entropy of a nonnegative vector, in bits. Normalization is not
// required: the locking bound evaluates H on the unnormalized vector Q(phi).
inline double shannon_entropy(const std::vector<double>& dist) {
  double h = 0.0;
  for (double x : dist) {
    require(x >= 0.0, "shannon_entropy: negative entry");
    h += neg_xlog2x(x);
  }
  return h;
}

// Von Neumann entropy in bits; eigenvalues below 1e-12 are clipped to zero.
inline double von_neumann_entropy(const Mat& rho) {
  require(rho.rows() == rho.cols(), "von_neumann_entropy: not square");
  require(is_hermitian(rho, 1e-8), "von_neumann_entropy: not Hermitian");
  require(std::abs(rho.trace().real() - 1.0) <= 1e-8,
          "von_neumann_entropy: trace != 1");
  Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
  double h = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double lam = es.eigenvalues()[i];
    require(lam >= -1e-8, "von_neumann_entropy: not PSD");
    if (lam < kEigClipTol) continue;
    h += neg_xlog2x(lam);
  }
  return h;
}

// ---------------------------------------------------------------------------
// POVMs

struct Povm {
  std::vector<Mat> elements;
};

inline void validate_povm(const Povm& povm, std::int64_t dim) {
  require(!povm.elements.empty(), "Povm: no elements");
  Mat sum = Mat::Zero(dim, dim);
  for (const Mat& e : povm.elements) {
    require(e.rows() == dim && e.cols() == dim, "Povm: element dimension mismatch");
    require(is_hermitian(e, 1e-9), "Povm: element not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(e, Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -1e-10, "Povm: element not PSD");
    sum += e;
  }
  sum -= Mat::Identity(dim, dim);
  require(max_abs(sum) <= kUnitaryTol, "Povm: elements do not sum to identity");
}

inline Povm basis_povm(std::int64_t dim) {
  Povm p;
  p.elements.reserve(dim);
  for (std::int64_t i = 0; i < dim; ++i) {
    Mat e = Mat::Zero(dim, dim);
    e(i, i) = 1.0;
    p.elements.push_back(std::move(e));
  }
  return p;
}

// Rank-one projective measurement onto the columns of a (Haar-random) unitary.
inline Povm rank_one_povm(const Mat& u) {
  Povm p;
  p.elements.reserve(u.cols());
  for (Eigen::Index i = 0; i < u.cols(); ++i)
    p.elements.push_back(u.col(i) * u.col(i).adjoint());
  return p;
}

namespace detail {
// Pseudo-inverse square root; eigenvalues below 1e-12 are treated as zero.
inline Mat pinv_sqrt(const Mat& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  Mat out = Mat::Zero(rho.rows(), rho.cols());
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double lam = es.eigenvalues()[i];
    if (lam > kEigClipTol)
      out += (1.0 / std::sqrt(lam)) * es.eigenvectors().col(i) *
             es.eigenvectors().col(i).adjoint();
  }
  return out;
}
}  // namespace detail

// Square-root (pretty good) measurement for weighted pure states, completed
// with the projector onto the orthogonal complement of their span. Rank
// deficiency is handled by the pseudo-inverse.
inline Povm pgm_povm(const std::vector<Vec>& states,
                     const std::vector<double>& weights) {
  require(!states.empty() && states.size() == weights.size(),
          "pgm_povm: states/weights mismatch");
  double wsum = 0.0;
  for (double w : weights) {
    require(w >= 0.0, "pgm_povm: negative weight");
    wsum += w;
  }
  require(std::abs(wsum - 1.0) <= 1e-9, "pgm_povm: weights must sum to 1");
  const std::int64_t dim = states.front().size();
  Mat avg = Mat::Zero(dim, dim);
  for (std::size_t i = 0; i < states.size(); ++i) {
    require(states[i].size() == dim, "pgm_povm: state dimension mismatch");
    avg.noalias() += weights[i] * states[i] * states[i].adjoint();
  }
  Mat root = detail::pinv_sqrt(avg);
  Povm p;
  p.elements.reserve(states.size() + 1);
  Mat sum = Mat::Zero(dim, dim);
  for (std::size_t i = 0; i < states.size(); ++i) {
    Vec g = root * (std::sqrt(weights[i]) * states[i]);
    Mat e = g * g.adjoint();
    sum += e;
    p.elements.push_back(std::move(e));
  }
  Mat rest = Mat::Identity(dim, dim) - sum;
  if (max_abs(rest) > 1e-10) p.elements.push_back((rest + rest.adjoint()) / 2.0);
  return p;
}

// PGM over density matrices (used for decoding noisy codewords and for
// measurements on key-averaged marginals).
inline Povm pgm_povm_mixed(const std::vector<Mat>& rhos,
                           const std::vector<double>& weights) {
  require(!rhos.empty() && rhos.size() == weights.size(),
          "pgm_povm_mixed: states/weights mismatch");
  const std::int64_t dim = rhos.front().rows();
  Mat avg = Mat::Zero(dim, dim);
  for (std::size_t i = 0; i < rhos.size(); ++i)
    avg.noalias() += weights[i] * rhos[i];
  Mat root = detail::pinv_sqrt(avg);
  Povm p;
  p.elements.reserve(rhos.size() + 1);
  Mat sum = Mat::Zero(dim, dim);
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    Mat e = root * (weights[i] * rhos[i]) * root;
    e = (e + Mat(e.adjoint())) / 2.0;
    sum += e;
    p.elements.push_back(std::move(e));
  }
  Mat rest = Mat::Identity(dim, dim) - sum;
  if (max_abs(rest) > 1e-10) p.elements.push_back((rest + rest.adjoint()) / 2.0);
  return p;
}

// ---------------------------------------------------------------------------
// The locking objective and its minimization over the unit sphere

// Key-averaged marginals A_c = (1/K) sum_s |psi_c^{(s)}><psi_c^{(s)}|,
// precomputed once so that Q_c(phi) = <phi|A_c|phi> costs O(M d^{2n}).
struct LockingMarginals {
  int M = 0;
  std::int64_t dim = 0;
  std::vector<Mat> A;

  static LockingMarginals build(const Codebook& cb, const LockingSet& ls) {
    check_cb_ls(cb, ls, "LockingMarginals");
    LockingMarginals lm;
    lm.M = cb.M;
    lm.dim = cb.dim();
    lm.A.reserve(cb.M);
    for (int c = 0; c < cb.M; ++c) lm.A.push_back(eve_marginal(cb, ls, c));
    return lm;
  }

  std::vector<double> q_of(const Vec& phi) const {
    std::vector<double> q(M);
    for (int c = 0; c < M; ++c)
      q[c] = std::max(0.0, std::real(phi.dot(A[c] * phi)));
    return q;
  }
};

// Inner brace of the accessible-information bound:
//   F(phi) = H[Q(phi)] - eta[sum_c Q_c(phi)].
inline double iacc_objective_from_q(const std::vector<double>& q) {
  double total = 0.0;
  double h = 0.0;
  for (double qc : q) {
    h += neg_xlog2x(qc);
    total += qc;
  }
  return h - neg_xlog2x(total);
}

inline double iacc_objective(const Vec& phi, const Codebook& cb,
                             const LockingSet& ls) {
  require(phi.size() == cb.dim(), "iacc_objective: phi dimension mismatch");
  return iacc_objective_from_q(q_vector(phi, cb, ls).values);
}

inline double iacc_objective(const PureState& phi, const Codebook& cb,
                             const LockingSet& ls) {
  return iacc_objective(phi.amp, cb, ls);
}

namespace detail {
// d/dx of -x log2 x; the argument is floored to keep the slope finite at 0.
inline double neg_xlog2x_prime(double x) {
  const double xf = std::max(x, 1e-300);
  return -(std::log(xf) + 1.0) / kLn2;
}
}  // namespace detail

// Complex gradient (wrt phi*) of F, projected onto the tangent space of the
// unit sphere at phi.
inline Vec iacc_sphere_gradient(const Vec& phi, const LockingMarginals& lm) {
  std::vector<double> q = lm.q_of(phi);
  double total = 0.0;
  for (double qc : q) total += qc;
  const double wt = detail::neg_xlog2x_prime(total);
  Vec g = Vec::Zero(phi.size());
  for (int c = 0; c < lm.M; ++c)
    g.noalias() += (detail::neg_xlog2x_prime(q[c]) - wt) * (lm.A[c] * phi);
  g *= 2.0;  // d/d(real coords) of a real function of phi, phi*
  g -= phi.dot(g) * phi;
  return g;
}

struct MinimizeBudget {
  int net_samples = 512;
  int restarts = 4;
  int grad_steps = 80;
  double tol = 1e-10;
  // Sampling density claimed for the Fannes correction. The default 0 reports
  // the raw sampled minimum (no net certificate); pass a positive epsilon to
  // subtract the corresponding correction from the minimum.
  double net_epsilon = 0.0;
};

struct MinimizationReport {
  double best_value = 0.0;
  PureState best_phi;
  std::int64_t samples_used = 0;
  int restarts = 0;
  double certified_correction = 0.0;

  std::string to_kv() const {
    std::ostringstream out;
    out.precision(17);
    out << "best_value=" << best_value << "\n"
        << "samples_used=" << samples_used << "\n"
        << "restarts=" << restarts << "\n"
        << "certified_correction=" << certified_correction << "\n";
    return out.str();
  }
};

// Fannes-type correction eps * log2(D) + eta(eps); the eps -> 0 limit is 0.
inline double fannes_correction(double epsilon, std::int64_t D) {
  require(epsilon >= 0.0 && epsilon <= 1.0,
          "fannes_correction: epsilon outside [0, 1]");
  require(D >= 1, "fannes_correction: D must be >= 1");
  if (epsilon == 0.0) return 0.0;
  return epsilon * std::log2(static_cast<double>(D)) + eta(epsilon);
}

// log2 of the guaranteed epsilon-net size bound (5/eps)^{2D}.
inline double net_size_bound(double epsilon, std::int64_t D) {
  require(epsilon > 0.0 && epsilon <= 5.0,
          "net_size_bound: epsilon outside (0, 5]");
  require(D >= 1, "net_size_bound: D must be >= 1");
  return 2.0 * static_cast<double>(D) * std::log2(5.0 / epsilon);
}

// Minimizes F(phi) by random sampling of the sphere followed by projected
// gradient descent from the best candidates. Sample i always comes from
// stream (seed, kPhi, i), so enlarging the budget refines, never degrades,
// the minimum under the same seed schedule.
inline MinimizationReport minimize_objective(const Codebook& cb,
                                             const LockingSet& ls,
                                             const MinimizeBudget& budget,
                                             RngStream& rng) {
  require(budget.net_samples >= 1 && budget.restarts >= 0 &&
              budget.grad_steps >= 0,
          "minimize_objective: budget must be positive");
  const LockingMarginals lm = LockingMarginals::build(cb, ls);
  const std::int64_t dim = lm.dim;
  const std::uint64_t seed = rng.base_seed();

  auto value_of = [&lm](const Vec& phi) {
    return iacc_objective_from_q(lm.q_of(phi));
  };

  std::vector<Vec> samples(budget.net_samples);
  std::vector<double> values(budget.net_samples);
  parallel_for(static_cast<std::size_t>(budget.net_samples), [&](std::size_t i) {
    RngStream s = RngStream::derive(seed, stream_tag::kPhi, i);
    samples[i] = random_unit_vec(dim, s);
    values[i] = value_of(samples[i]);
  });

  // Pick the `restarts` best sampled candidates as descent starts.
  std::vector<int> order(budget.net_samples);
  for (int i = 0; i < budget.net_samples; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return values[a] < values[b]; });

  Vec best_phi = samples[order[0]];
  double best_value = values[order[0]];

  const int starts = std::min(budget.restarts, budget.net_samples);
  for (int r = 0; r < starts; ++r) {
    Vec phi = samples[order[r]];
    double f = values[order[r]];
    double step = 0.25;
    for (int it = 0; it < budget.grad_steps; ++it) {
      Vec grad = iacc_sphere_gradient(phi, lm);
      double gnorm = grad.norm();
      if (gnorm <= budget.tol) break;
      bool moved = false;
      while (step > 1e-14) {
        Vec cand = phi - step * grad;
        cand /= cand.norm();
        double fc = value_of(cand);
        if (fc < f - 1e-4 * step * gnorm * gnorm) {
          phi = std::move(cand);
          f = fc;
          step = std::min(step * 1.5, 1.0);
          moved = true;
          break;
        }
        step /= 2.0;
      }
      if (!moved) break;
    }
    if (f < best_value) {
      best_value = f;
      best_phi = phi;
    }
  }

  MinimizationReport report;
  report.best_value = best_value;
  report.best_phi = PureState(cb.d, cb.n, std::move(best_phi));
  report.samples_used = budget.net_samples;
  report.restarts = starts;
  report.certified_correction = fannes_correction(budget.net_epsilon, dim);
  return report;
}

// Accessible-information upper bound
//   log2 M - (d^n / M) (best_value - certified_correction),
// floored at 0 and capped at log2 M.
inline double iacc_upper_bound(const Codebook& cb, const LockingSet& ls,
                               const MinimizationReport& report) {
  check_cb_ls(cb, ls, "iacc_upper_bound");
  require(report.best_phi.dim() == cb.dim(),
          "iacc_upper_bound: report does not match codebook dimensions");
  const double log2M = std::log2(static_cast<double>(cb.M));
  const double ratio = static_cast<double>(cb.dim()) / cb.M;
  double bound =
      log2M - ratio * (report.best_value - report.certified_correction);
  return std::clamp(bound, 0.0, log2M);
}

// Classical mutual information I(X;Y) in bits for the measurement described
// by `povm` applied to the key-averaged Eve marginals, under the uniform
// message prior. This is a lower bound on the accessible information.
inline double measured_mutual_information(const Codebook& cb,
                                          const LockingSet& ls,
                                          const Povm& povm) {
  check_cb_ls(cb, ls, "measured_mutual_information");
  validate_povm(povm, cb.dim());
  const LockingMarginals lm = LockingMarginals::build(cb, ls);
  const int M = cb.M;
  const std::size_t Y = povm.elements.size();
  std::vector<double> joint(static_cast<std::size_t>(M) * Y, 0.0);
  std::vector<double> py(Y, 0.0);
  for (int x = 0; x < M; ++x) {
    for (std::size_t y = 0; y < Y; ++y) {
      double p = std::real((povm.elements[y] * lm.A[x]).trace());
      p = std::max(0.0, p);
      joint[x * Y + y] = p / M;
      py[y] += p / M;
    }
  }
  double mi = 0.0;
  for (int x = 0; x < M; ++x)
    for (std::size_t y = 0; y < Y; ++y) {
      double pxy = joint[x * Y + y];
      if (pxy <= 0.0 || py[y] <= 0.0) continue;
      mi += pxy * std::log2(pxy / ((1.0 / M) * py[y]));
    }
  return std::max(0.0, mi);
}

}  // namespace qdl
