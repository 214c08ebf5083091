// End-to-end seeded simulation: Alice encodes with locked product codewords,
// Bob decodes with a PGM after undoing the lock, Eve measures either the
// channel input (strong locking) or the complement-channel output (weak
// locking). Also the key-recycling bootstrap ledger.

#pragma once

#include "qdl/channels.hpp"
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

// Protocol-level infeasibility (e.g. a bootstrap with R < k); mapped to its
// own CLI exit code, distinct from argument validation errors.
struct protocol_infeasible : std::runtime_error {
  explicit protocol_infeasible(const std::string& what)
      : std::runtime_error(what) {}
};

enum class EveMeasurement { kBasis, kRandomRankOne, kPgm };
enum class EveSide { kStrong, kWeak };
enum class DecoderMode { kNoiselessPgm, kNoiseAdjustedPgm };

struct ProtocolConfig {
  int d = 2;
  int n = 1;
  int M = 1;
  int K = 1;
  ChannelSpec channel;
  EveMeasurement eve_measurement = EveMeasurement::kBasis;
  EveSide eve_side = EveSide::kStrong;
  // When true the key value is public (no-locking control): Eve undoes the
  // true lock before measuring.
  bool eve_knows_key = false;
  Ensemble ensemble = Ensemble::kHaarPure;
  bool distinct_basis = false;
  DecoderMode decoder = DecoderMode::kNoiselessPgm;
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;
  bool compute_bound = true;
  MinimizeBudget bound_budget{256, 3, 50, 1e-9, 0.0};

  void validate() const {
    require(d >= 2 && n >= 1 && M >= 1 && K >= 1 && trials >= 1,
            "ProtocolConfig: bad dimensions");
    pow_dim(d + 1, n, "ProtocolConfig");  // decode space must fit the cap
  }
};

struct RoundReport {
  double decode_error_rate = 0.0;
  double decode_error_stderr = 0.0;
  double eve_mi_estimate = 0.0;  // Miller-Madow corrected, clamped to >= 0
  double iacc_bound = 0.0;
  double key_bits_used = 0.0;  // log2 K
  std::int64_t trials = 0;
  bool low_sample_warning = false;  // fewer than 25 expected counts/message

  std::string to_kv() const {
    std::ostringstream out;
    out.precision(17);
    out << "decode_error_rate=" << decode_error_rate << "\n"
        << "decode_error_stderr=" << decode_error_stderr << "\n"
        << "eve_mi_estimate=" << eve_mi_estimate << "\n"
        << "iacc_bound=" << iacc_bound << "\n"
        << "key_bits_used=" << key_bits_used << "\n"
        << "trials=" << trials << "\n"
        << "low_sample_warning=" << (low_sample_warning ? 1 : 0) << "\n";
    return out.str();
  }

  static std::string csv_header() {
    return "decode_error_rate,decode_error_stderr,eve_mi_estimate,iacc_bound,"
           "key_bits_used,trials,low_sample_warning";
  }

  std::string csv_row() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%lld,%d",
                  decode_error_rate, decode_error_stderr, eve_mi_estimate,
                  iacc_bound, key_bits_used, static_cast<long long>(trials),
                  low_sample_warning ? 1 : 0);
    return buf;
  }
};

namespace detail {

// Per-qudit channel to Bob. The depolarizing / pconvex members of the family
// are simulated through their dephased erasure reduction (the flag qubit is
// classical after dephasing and the rest of Bob's output is then exactly an
// erasure channel with erasure probability p, independently of sigma), which
// keeps Bob's decode space at (d+1)^n and makes the lock inversion exact.
inline ChannelModel bob_qudit_channel(const ChannelSpec& spec, int d) {
  switch (spec.kind) {
    case ChannelKind::kNoiseless:
      return identity_channel(d);
    case ChannelKind::kErasure:
    case ChannelKind::kDepolarizing:
    case ChannelKind::kPConvex:
      return erasure_channel(d, spec.p);
  }
  throw std::logic_error("bob_qudit_channel: unreachable");
}

// Per-qudit channel to Eve (the complement side of the family). For the
// noiseless channel the complement is a constant channel: weak-locking Eve
// learns nothing.
inline ChannelModel eve_qudit_channel(const ChannelSpec& spec, int d) {
  Mat mixed = Mat::Identity(d, d) / d;
  switch (spec.kind) {
    case ChannelKind::kNoiseless: {
      Mat ground = Mat::Zero(d, d);
      ground(0, 0) = 1.0;
      return p_convex_channel(d, 0.0, ground);
    }
    case ChannelKind::kErasure:
      return erasure_channel(d, 1.0 - spec.p);
    case ChannelKind::kDepolarizing:
    case ChannelKind::kPConvex:
      return p_convex_channel(d, spec.p, mixed);
  }
  throw std::logic_error("eve_qudit_channel: unreachable");
}

// Inverse lock in the (possibly erasure-extended) output space: U^dag on the
// first d dimensions, identity on the flag.
inline Mat extended_inverse(const Mat& u, int out_dim) {
  const int d = static_cast<int>(u.rows());
  if (out_dim == d) return u.adjoint();
  require(out_dim == d + 1, "extended_inverse: unsupported output dimension");
  Mat m = Mat::Identity(d + 1, d + 1);
  m.topLeftCorner(d, d) = u.adjoint();
  return m;
}

inline Vec embed_vec(const Vec& v, int out_dim) {
  if (v.size() == out_dim) return v;
  Vec e = Vec::Zero(out_dim);
  e.head(v.size()) = v;
  return e;
}

// Samples an outcome index from a normalized probability accumulator.
inline int sample_outcome(const std::vector<double>& probs, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

struct PgmDecoder {
  // rank-one part: outcome probabilities |<g_c|b>|^2, plus a reject element
  std::vector<Vec> pure_g;
  std::vector<Mat> mixed_e;
  bool rank_one = true;

  int sample(const Vec& b, RngStream& rng, int M) const {
    // The PGM elements plus the reject (complement) element sum to identity,
    // so the outcome probabilities below sum to 1 up to rounding.
    const double u = rng.uniform();
    double acc = 0.0;
    for (int c = 0; c < M; ++c) {
      acc += rank_one ? std::norm(pure_g[c].dot(b))
                      : std::max(0.0, std::real(b.dot(mixed_e[c] * b)));
      if (u < acc) return c;
    }
    return -1;  // reject outcome: caller guesses uniformly
  }
};

}  // namespace detail

// Plug-in mutual information of a contingency table with the Miller-Madow
// bias correction, in bits.
inline double miller_madow_mi(const std::vector<std::int64_t>& counts, int nx,
                              int ny) {
  std::int64_t total = 0;
  std::vector<std::int64_t> rx(nx, 0), cy(ny, 0);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y) {
      rx[x] += counts[x * ny + y];
      cy[y] += counts[x * ny + y];
      total += counts[x * ny + y];
    }
  if (total == 0) return 0.0;
  const double nt = static_cast<double>(total);
  double hx = 0.0, hy = 0.0, hxy = 0.0;
  int mx = 0, my = 0, mxy = 0;
  for (int x = 0; x < nx; ++x)
    if (rx[x] > 0) {
      hx += neg_xlog2x(rx[x] / nt);
      ++mx;
    }
  for (int y = 0; y < ny; ++y)
    if (cy[y] > 0) {
      hy += neg_xlog2x(cy[y] / nt);
      ++my;
    }
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y)
      if (counts[x * ny + y] > 0) {
        hxy += neg_xlog2x(counts[x * ny + y] / nt);
        ++mxy;
      }
  // H_mm = H + (m - 1) / (2 N ln 2) per marginal table
  const double corr = ((mx - 1) + (my - 1) - (mxy - 1)) / (2.0 * nt * kLn2);
  return hx + hy - hxy + corr;
}

inline RoundReport run_round(const ProtocolConfig& cfg, RngStream& rng) {
  cfg.validate();
  const std::uint64_t seed = rng.base_seed();
  const int d = cfg.d, n = cfg.n, M = cfg.M, K = cfg.K;

  RngStream cb_rng = RngStream::derive(seed, stream_tag::kCodebook);
  RngStream ls_rng = RngStream::derive(seed, stream_tag::kLockingSet);
  Codebook cb = sample_codebook(d, n, M, cfg.ensemble, cb_rng, cfg.distinct_basis);
  LockingSet ls = sample_locking_set(d, n, K, ls_rng);

  const ChannelModel bob_ch = detail::bob_qudit_channel(cfg.channel, d);
  const ChannelModel eve_ch = detail::eve_qudit_channel(cfg.channel, d);
  const int bob_out = bob_ch.output_dim;
  const int eve_out =
      cfg.eve_side == EveSide::kStrong ? d : eve_ch.output_dim;
  const std::int64_t bob_dim = pow_dim(bob_out, n, "run_round");
  const std::int64_t eve_dim = pow_dim(eve_out, n, "run_round");

  // Bob's decoder.
  detail::PgmDecoder decoder;
  {
    std::vector<double> w(M, 1.0 / M);
    if (cfg.decoder == DecoderMode::kNoiselessPgm) {
      // PGM element E_c = |g_c><g_c| in factored form: sampling only needs
      // the vectors g_c = avg^{-1/2} sqrt(w_c) |psi_c>.
      std::vector<Vec> embedded(M);
      for (int c = 0; c < M; ++c) {
        Vec full = detail::embed_vec(cb.factor(c, 0), bob_out);
        for (int j = 1; j < n; ++j)
          full = kron_vec(full, detail::embed_vec(cb.factor(c, j), bob_out));
        embedded[c] = std::move(full);
      }
      decoder.rank_one = true;
      decoder.pure_g.resize(M);
      Mat avg = Mat::Zero(bob_dim, bob_dim);
      for (int c = 0; c < M; ++c)
        avg.noalias() += w[c] * embedded[c] * embedded[c].adjoint();
      Mat root = detail::pinv_sqrt(avg);
      for (int c = 0; c < M; ++c)
        decoder.pure_g[c] = root * (std::sqrt(w[c]) * embedded[c]);
    } else {
      std::vector<Mat> evolved(M);
      for (int c = 0; c < M; ++c) {
        Mat full = bob_ch.apply(cb.factor(c, 0) * cb.factor(c, 0).adjoint());
        for (int j = 1; j < n; ++j)
          full = kron(full,
                      bob_ch.apply(cb.factor(c, j) * cb.factor(c, j).adjoint()));
        evolved[c] = std::move(full);
      }
      Povm povm = pgm_povm_mixed(evolved, w);
      decoder.rank_one = false;
      decoder.mixed_e.assign(povm.elements.begin(),
                             povm.elements.begin() + M);
    }
  }

  // Eve's measurement. For kRandomRankOne a fixed Haar basis of her space;
  // for kPgm the PGM over her key-averaged (and, weak side, channel-evolved)
  // marginals.
  RngStream eve_rng = RngStream::derive(seed, stream_tag::kEve);
  Mat eve_basis_u;
  std::vector<Mat> eve_pgm;
  int eve_outcomes = static_cast<int>(eve_dim);
  if (cfg.eve_measurement == EveMeasurement::kRandomRankOne) {
    eve_basis_u = haar_unitary(static_cast<int>(eve_dim), eve_rng).m;
  } else if (cfg.eve_measurement == EveMeasurement::kPgm) {
    std::vector<Mat> marg(M, Mat::Zero(eve_dim, eve_dim));
    for (int c = 0; c < M; ++c) {
      for (int s = 0; s < K; ++s) {
        if (cfg.eve_side == EveSide::kStrong) {
          Vec v = ls.unit(s, 0) * cb.factor(c, 0);
          for (int j = 1; j < n; ++j)
            v = kron_vec(v, ls.unit(s, j) * cb.factor(c, j));
          marg[c].noalias() += v * v.adjoint();
        } else {
          Vec f0 = ls.unit(s, 0) * cb.factor(c, 0);
          Mat full = eve_ch.apply(f0 * f0.adjoint());
          for (int j = 1; j < n; ++j) {
            Vec fj = ls.unit(s, j) * cb.factor(c, j);
            full = kron(full, eve_ch.apply(fj * fj.adjoint()));
          }
          marg[c] += full;
        }
      }
      marg[c] /= K;
    }
    std::vector<double> w(M, 1.0 / M);
    Povm povm = pgm_povm_mixed(marg, w);
    eve_pgm = povm.elements;
    eve_outcomes = static_cast<int>(eve_pgm.size());
  }

  // Trials: each writes only its own slot.
  struct Outcome {
    std::uint8_t error;
    std::int32_t c;
    std::int32_t y;
  };
  std::vector<Outcome> outcomes(cfg.trials);
  parallel_for(static_cast<std::size_t>(cfg.trials), [&](std::size_t t) {
    RngStream s = RngStream::derive(seed, stream_tag::kTrial, t);
    const int c = static_cast<int>(s.index(M));
    const int key = static_cast<int>(s.index(K));

    // Bob's side
    Vec bob_state;
    for (int j = 0; j < n; ++j) {
      Vec f = ls.unit(key, j) * cb.factor(c, j);
      Vec out = bob_ch.sample_apply(f, s).first;
      Vec undone = detail::extended_inverse(ls.unit(key, j), bob_out) * out;
      bob_state = j == 0 ? undone : kron_vec(bob_state, undone);
    }
    int decoded = decoder.sample(bob_state, s, M);
    if (decoded < 0) decoded = static_cast<int>(s.index(M));  // reject: guess

    // Eve's side
    Vec eve_state;
    for (int j = 0; j < n; ++j) {
      Vec f = ls.unit(key, j) * cb.factor(c, j);
      Vec e = cfg.eve_side == EveSide::kStrong ? f
                                               : eve_ch.sample_apply(f, s).first;
      if (cfg.eve_knows_key)
        e = detail::extended_inverse(ls.unit(key, j), eve_out) * e;
      eve_state = j == 0 ? e : kron_vec(eve_state, e);
    }
    int y = 0;
    if (cfg.eve_measurement == EveMeasurement::kBasis) {
      std::vector<double> probs(eve_dim);
      for (std::int64_t i = 0; i < eve_dim; ++i)
        probs[i] = std::norm(eve_state[i]);
      y = detail::sample_outcome(probs, s);
    } else if (cfg.eve_measurement == EveMeasurement::kRandomRankOne) {
      std::vector<double> probs(eve_dim);
      for (std::int64_t i = 0; i < eve_dim; ++i)
        probs[i] = std::norm(eve_basis_u.col(i).dot(eve_state));
      y = detail::sample_outcome(probs, s);
    } else {
      std::vector<double> probs(eve_pgm.size());
      for (std::size_t i = 0; i < eve_pgm.size(); ++i)
        probs[i] = std::max(0.0, std::real(eve_state.dot(eve_pgm[i] * eve_state)));
      y = detail::sample_outcome(probs, s);
    }

    outcomes[t] = {static_cast<std::uint8_t>(decoded != c ? 1 : 0),
                   static_cast<std::int32_t>(c), static_cast<std::int32_t>(y)};
  });

  RoundReport rep;
  rep.trials = cfg.trials;
  rep.key_bits_used = std::log2(static_cast<double>(K));
  std::int64_t errors = 0;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(M) * eve_outcomes, 0);
  for (const auto& o : outcomes) {
    errors += o.error;
    ++counts[static_cast<std::size_t>(o.c) * eve_outcomes + o.y];
  }
  rep.decode_error_rate = static_cast<double>(errors) / cfg.trials;
  rep.decode_error_stderr = std::sqrt(
      rep.decode_error_rate * (1.0 - rep.decode_error_rate) / cfg.trials);
  const double log2M = std::log2(static_cast<double>(M));
  rep.eve_mi_estimate =
      std::clamp(miller_madow_mi(counts, M, eve_outcomes), 0.0, log2M);
  rep.low_sample_warning = cfg.trials < 25ll * M;

  // without the minimization, report the trivially valid bound log2 M
  rep.iacc_bound = log2M;
  if (cfg.compute_bound) {
    RngStream min_rng = RngStream::derive(seed, stream_tag::kMinimizer);
    MinimizationReport min_rep =
        minimize_objective(cb, ls, cfg.bound_budget, min_rng);
    rep.iacc_bound = iacc_upper_bound(cb, ls, min_rep);
  }
  return rep;
}

// Monte Carlo PGM decode-error frequency (Eve and the bound switched off).
inline std::pair<double, double> decode_error_estimate(ProtocolConfig cfg,
                                                       RngStream& rng) {
  cfg.compute_bound = false;
  cfg.eve_measurement = EveMeasurement::kBasis;
  RoundReport rep = run_round(cfg, rng);
  return {rep.decode_error_rate, rep.decode_error_stderr};
}

// ---------------------------------------------------------------------------
// Bootstrap ledger (integer bit accounting)
//
// Round 1 consumes the pre-shared initial key of ceil(n k) bits; rounds
// 1..n'-1 set aside the same number of delivered bits as the next round's
// key; the final round recycles nothing. Conservation is exact:
//   sum(key_recycled) + initial_key = sum(key_in).
// net_rate_so_far after j rounds charges the initial key against the fresh
// payload banked so far; the final value equals (message_bits - key_in)/n.

struct BootstrapRound {
  std::int64_t key_in = 0;
  std::int64_t message_bits = 0;
  std::int64_t key_recycled = 0;
  double net_rate_so_far = 0.0;
};

struct BootstrapLedger {
  int n = 1;
  int n_prime = 1;
  std::int64_t initial_key = 0;
  std::vector<BootstrapRound> rounds;
  double net_rate = 0.0;

  std::string to_csv() const {
    std::string out = "round,key_in,message_bits,key_recycled,net_rate_so_far\n";
    char buf[128];
    for (std::size_t i = 0; i < rounds.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%lld,%lld,%lld,%.9g\n", i + 1,
                    static_cast<long long>(rounds[i].key_in),
                    static_cast<long long>(rounds[i].message_bits),
                    static_cast<long long>(rounds[i].key_recycled),
                    rounds[i].net_rate_so_far);
      out += buf;
    }
    return out;
  }
};

// Pure accounting form: R and k in bits per channel use, n channel uses per
// round, n' rounds. message_bits = floor(n R), key_in = ceil(n k).
inline BootstrapLedger bootstrap_ledger(double R, double k, int n, int n_prime) {
  require(R >= 0.0 && k >= 0.0, "bootstrap_ledger: R, k must be >= 0");
  require(n >= 1 && n_prime >= 1, "bootstrap_ledger: n, n' must be >= 1");
  const std::int64_t message =
      static_cast<std::int64_t>(std::floor(n * R + 1e-9));
  const std::int64_t key = static_cast<std::int64_t>(std::ceil(n * k - 1e-9));
  if (message < key)
    throw protocol_infeasible(
        "bootstrap_ledger: R < k, recycling cannot sustain the key");
  BootstrapLedger ledger;
  ledger.n = n;
  ledger.n_prime = n_prime;
  ledger.initial_key = key;
  std::int64_t fresh = 0;
  for (int i = 1; i <= n_prime; ++i) {
    BootstrapRound round;
    round.key_in = key;
    round.message_bits = message;
    round.key_recycled = i < n_prime ? key : 0;
    fresh += message - round.key_recycled;
    round.net_rate_so_far = static_cast<double>(fresh - ledger.initial_key) /
                            (static_cast<double>(n) * i);
    ledger.rounds.push_back(round);
  }
  ledger.net_rate = ledger.rounds.back().net_rate_so_far;
  return ledger;
}

// Config-driven form: each round spends n channel uses on one codeword, so it
// delivers floor(log2 M) message bits and consumes ceil(log2 K) key bits.
inline BootstrapLedger run_bootstrap(const ProtocolConfig& cfg, int n_prime,
                                     RngStream& rng) {
  cfg.validate();
  (void)rng;  // accounting only; transmission statistics come from run_round
  const double R = std::log2(static_cast<double>(cfg.M)) / cfg.n;
  const double k = std::log2(static_cast<double>(cfg.K)) / cfg.n;
  return bootstrap_ledger(R, k, cfg.n, n_prime);
}

}  // namespace qdl
