// qdl: reproduce the locking-rate figures, verify the numerical invariant
// suites, evaluate key-length thresholds, and run protocol simulations.
//
// Exit codes: 0 success, 1 verification failure, 2 I/O error, 3 protocol
// infeasibility, 64 usage error.

#include "qdl/qdl.hpp"
#include "svg_plot.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace qdl;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFail = 1;
constexpr int kIoError = 2;
constexpr int kInfeasible = 3;
constexpr int kUsage = 64;

struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw io_error("write failed: " + path);
}

// Collects named assertions and prints one machine-readable line per check.
struct Checker {
  bool all_pass = true;

  void check(const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("%s %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
                detail.empty() ? "" : "  ", detail.c_str());
    all_pass = all_pass && ok;
  }

  void skip(const std::string& name, const std::string& why) {
    std::printf("SKIP %s  %s\n", name.c_str(), why.c_str());
  }

  int exit_code() const { return all_pass ? kOk : kVerifyFail; }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// ---------------------------------------------------------------------------

struct FigureArgs {
  std::string channel;
  int d = 64;
  int points = 101;
  std::string out;
  std::string plot;
};

int cmd_figure(const FigureArgs& args) {
  RateCurve curve = rate_curve(args.channel, args.d, args.points);
  write_file(args.out, rate_curve_csv(curve));
  if (!args.plot.empty()) write_file(args.plot, qdl_cli::rate_curve_svg(curve));
  return kOk;
}

// ---------------------------------------------------------------------------

struct ThresholdArgs {
  int d = 2;
  int n = 1;
  std::int64_t M = 2;
  double eps = 0.1;
  std::optional<double> weak_p;
  double weak_delta = 0.0;
  bool csv = false;
};

int cmd_threshold(const ThresholdArgs& args) {
  std::optional<WeakParams> weak;
  if (args.weak_p) weak = WeakParams{*args.weak_p, args.weak_delta};
  KeyThresholdReport rep = key_threshold(args.d, args.n, args.M, args.eps, weak);
  if (rep.delta_defaulted)
    std::fprintf(stderr,
                 "warning: weak-locking slack delta defaulted to 0 (the "
                 "asymptotic limit)\n");
  if (args.csv) {
    std::printf("%s\n%s\n", KeyThresholdReport::csv_header().c_str(),
                rep.csv_row().c_str());
    return kOk;
  }
  std::fputs(rep.to_kv().c_str(), stdout);
  std::printf("log2_K_min_per_n=%s\n", fmt(rep.log2_K_min / args.n).c_str());
  return kOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  int d = 2, n = 1, M = 2, K = 1;
  std::string channel = "noiseless";
  std::string eve = "basis";
  std::string ensemble = "haar";
  bool distinct = false;
  bool weak = false;
  bool eve_knows_key = false;
  bool adjusted_decoder = false;
  bool no_bound = false;
  bool csv = false;
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;
  std::string out;
};

ProtocolConfig make_config(const SimulateArgs& args) {
  ProtocolConfig cfg;
  cfg.d = args.d;
  cfg.n = args.n;
  cfg.M = args.M;
  cfg.K = args.K;
  cfg.channel = parse_channel_spec(args.channel);
  if (args.eve == "basis")
    cfg.eve_measurement = EveMeasurement::kBasis;
  else if (args.eve == "random-rank-one")
    cfg.eve_measurement = EveMeasurement::kRandomRankOne;
  else if (args.eve == "pgm")
    cfg.eve_measurement = EveMeasurement::kPgm;
  else
    throw std::invalid_argument("simulate: unknown eve measurement '" +
                                args.eve + "'");
  if (args.ensemble == "haar")
    cfg.ensemble = Ensemble::kHaarPure;
  else if (args.ensemble == "basis")
    cfg.ensemble = Ensemble::kBasis;
  else
    throw std::invalid_argument("simulate: unknown ensemble '" +
                                args.ensemble + "'");
  cfg.distinct_basis = args.distinct;
  cfg.eve_side = args.weak ? EveSide::kWeak : EveSide::kStrong;
  cfg.eve_knows_key = args.eve_knows_key;
  cfg.decoder = args.adjusted_decoder ? DecoderMode::kNoiseAdjustedPgm
                                      : DecoderMode::kNoiselessPgm;
  cfg.trials = args.trials;
  cfg.seed = args.seed;
  cfg.compute_bound = !args.no_bound;
  return cfg;
}

int cmd_simulate(const SimulateArgs& args) {
  ProtocolConfig cfg = make_config(args);
  RngStream rng(cfg.seed);
  RoundReport rep = run_round(cfg, rng);
  std::string text = args.csv ? RoundReport::csv_header() + "\n" +
                                    rep.csv_row() + "\n"
                              : rep.to_kv();
  if (!args.out.empty())
    write_file(args.out, text);
  else
    std::fputs(text.c_str(), stdout);
  return kOk;
}

struct BootstrapArgs {
  int rounds = 1;
  int n = 100;
  std::optional<double> R;
  std::optional<double> k;
  std::optional<SimulateArgs> sim;
  std::string out;
};

int cmd_bootstrap(const BootstrapArgs& args) {
  BootstrapLedger ledger;
  if (args.R && args.k) {
    ledger = bootstrap_ledger(*args.R, *args.k, args.n, args.rounds);
  } else {
    ProtocolConfig cfg = make_config(*args.sim);
    RngStream rng(cfg.seed);
    ledger = run_bootstrap(cfg, args.rounds, rng);
  }
  std::string csv = ledger.to_csv();
  if (!args.out.empty())
    write_file(args.out, csv);
  else
    std::fputs(csv.c_str(), stdout);
  return kOk;
}

// ---------------------------------------------------------------------------
// verify suites

struct VerifyArgs {
  int d = 2;
  int n = 2;
  int M = 4;
  int K = 500;
  double eps = 0.3;
  std::int64_t trials = 100000;
  std::uint64_t seed = 42;
  bool weyl = false;
  bool csv = false;
};

int verify_moments(const VerifyArgs& a) {
  Checker ck;
  RngStream rng(a.seed);
  MomentReport prod = mc_moments(a.d, a.n, a.trials, rng, PhiMode::kProduct);
  if (a.csv)
    std::printf("%s\n%s\n", MomentReport::csv_header().c_str(),
                prod.csv_row().c_str());
  ck.check("moments.first.product",
           std::abs(prod.mc_first - prod.analytic_first) <=
               3.0 * prod.mc_first_stderr,
           "mc=" + fmt(prod.mc_first) + " analytic=" + fmt(prod.analytic_first));
  ck.check("moments.second.product_tight",
           std::abs(prod.mc_second - prod.analytic_second_bound) <=
               3.0 * prod.mc_second_stderr,
           "mc=" + fmt(prod.mc_second) +
               " analytic=" + fmt(prod.analytic_second_bound));
  RngStream rng2 = RngStream::derive(a.seed, 0x77);
  MomentReport rnd = mc_moments(a.d, a.n, a.trials, rng2, PhiMode::kRandom);
  ck.check("moments.first.random",
           std::abs(rnd.mc_first - rnd.analytic_first) <=
               3.0 * rnd.mc_first_stderr);
  ck.check("moments.second.random_bounded",
           rnd.mc_second <=
               rnd.analytic_second_bound + 3.0 * rnd.mc_second_stderr,
           "mc=" + fmt(rnd.mc_second) +
               " bound=" + fmt(rnd.analytic_second_bound));
  return ck.exit_code();
}

int verify_concentration(const VerifyArgs& a) {
  Checker ck;
  ConcentrationExperiment exp;
  exp.d = a.d;
  exp.n = a.n;
  exp.K = a.K;
  exp.M = a.M;
  exp.epsilon = a.eps;
  exp.trials = a.trials;
  exp.seed = a.seed;
  auto run = [&](ViolationEvent ev, const std::string& name) {
    RngStream rng(a.seed);
    ViolationResult r = empirical_violation_rate(exp, ev, rng);
    ck.check(name, r.observed <= r.bound + 3.0 * r.observed_stderr,
             "observed=" + fmt(r.observed) + " bound=" + fmt(r.bound));
  };
  run(ViolationEvent::kLowerTail, "concentration.lower_tail");
  run(ViolationEvent::kSumWindow, "concentration.sum_window");
  const double dn = std::pow(double(a.d), a.n);
  if (1.0 - a.eps - 1.0 / dn > 0.0)
    run(ViolationEvent::kUpperOperator, "concentration.upper_operator");
  else
    ck.skip("concentration.upper_operator", "event infeasible: 1-eps-1/d^n <= 0");
  return ck.exit_code();
}

int verify_channels(const VerifyArgs& a) {
  Checker ck;
  RngStream rng(a.seed);
  const int d = a.d;

  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    Mat rho = random_density_matrix(d, rng);
    Mat sigma = random_density_matrix(d, rng);
    double p = rng.uniform();
    IsometryModel iso = general_isometry(d, p, sigma);
    worst = std::max(
        worst, max_abs(eve_output(iso, rho) - (p * rho + (1.0 - p) * sigma)));
  }
  ck.check("channels.isometry_identity", worst <= 1e-10,
           "max_residual=" + fmt(worst));

  double worst_dep = 0.0, worst_sigma = 0.0;
  for (int i = 0; i < 10; ++i) {
    Mat rho = random_density_matrix(d, rng);
    Mat s1 = random_density_matrix(d, rng);
    Mat s2 = random_density_matrix(d, rng);
    double p = rng.uniform();
    IsometryModel iso1 = general_isometry(d, p, s1);
    IsometryModel iso2 = general_isometry(d, p, s2);
    Mat flat1 = dephase_flag(iso1, rho);
    Mat flat2 = dephase_flag(iso2, rho);
    worst_dep =
        std::max(worst_dep, max_abs(flat1 - erasure_channel(d, p).apply(rho)));
    worst_sigma = std::max(worst_sigma, max_abs(flat1 - flat2));
  }
  ck.check("channels.dephase_matches_erasure", worst_dep <= 1e-10,
           "max_residual=" + fmt(worst_dep));
  ck.check("channels.dephase_sigma_independent", worst_sigma <= 1e-10,
           "max_residual=" + fmt(worst_sigma));

  bool cptp_ok = true;
  Mat sigma = random_density_matrix(d, rng);
  for (const ChannelModel& ch :
       {identity_channel(d), erasure_channel(d, 0.5), erasure_channel(d, 0.0),
        erasure_channel(d, 1.0), depolarizing_channel(d, 0.25),
        p_convex_channel(d, 0.6, sigma), conj_depolarizing_bob(d, 0.4)}) {
    CptpReport rep = cptp_check(ch);
    if (!rep.pass) cptp_ok = false;
  }
  ck.check("channels.cptp", cptp_ok);

  ChannelModel bad = erasure_channel(d, 0.5);
  for (Mat& k : bad.kraus) k *= 0.9;
  ck.check("channels.cptp_negative_control", !cptp_check(bad).pass);

  double worst_ent = 0.0;
  ChannelModel bob = conj_depolarizing_bob(d, 0.35);
  ChannelModel eve = depolarizing_channel(d, 1.0 - 0.35);
  for (int i = 0; i < 5; ++i) {
    Vec psi = random_unit_vec(d, rng);
    Mat pure = psi * psi.adjoint();
    worst_ent = std::max(worst_ent,
                         std::abs(von_neumann_entropy(bob.apply(pure)) -
                                  von_neumann_entropy(eve.apply(pure))));
  }
  ck.check("channels.complementary_entropies", worst_ent <= 1e-8,
           "max_gap=" + fmt(worst_ent));
  return ck.exit_code();
}

int verify_bound(const VerifyArgs& a) {
  Checker ck;
  RngStream rng(a.seed);
  if (a.weyl) {
    RngStream cb_rng = rng.child(stream_tag::kCodebook);
    Codebook cb =
        sample_codebook(a.d, 1, a.d, Ensemble::kBasis, cb_rng, true);
    LockingSet weyl = weyl_locking_set(a.d);
    RngStream min_rng = rng.child(stream_tag::kMinimizer);
    MinimizationReport rep =
        minimize_objective(cb, weyl, MinimizeBudget{256, 2, 40, 1e-10}, min_rng);
    std::fputs(rep.to_kv().c_str(), stdout);
    double bound = iacc_upper_bound(cb, weyl, rep);
    ck.check("bound.weyl_iacc_zero", bound <= 1e-6, "bound=" + fmt(bound));
    double mi = measured_mutual_information(cb, weyl, basis_povm(a.d));
    ck.check("bound.weyl_measured_mi", mi <= 1e-6, "mi=" + fmt(mi));
  } else {
    RngStream cb_rng = rng.child(stream_tag::kCodebook);
    RngStream ls_rng = rng.child(stream_tag::kLockingSet);
    Codebook cb = sample_codebook(a.d, a.n, a.M, Ensemble::kHaarPure, cb_rng);
    LockingSet ls = sample_locking_set(a.d, a.n, a.K, ls_rng);
    RngStream min_rng = rng.child(stream_tag::kMinimizer);
    MinimizationReport rep =
        minimize_objective(cb, ls, MinimizeBudget{512, 4, 60, 1e-10}, min_rng);
    std::fputs(rep.to_kv().c_str(), stdout);
    double bound = iacc_upper_bound(cb, ls, rep);
    double mi = measured_mutual_information(cb, ls, basis_povm(cb.dim()));
    ck.check("bound.sandwich", mi <= bound + 1e-6,
             "mi=" + fmt(mi) + " bound=" + fmt(bound));
  }
  return ck.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum-data-locking rate and protocol toolbox"};
  app.require_subcommand(1);
  app.set_config("--config", "", "config file with 'key = value' lines");
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all cores)")
      ->envname("QDL_THREADS");

  FigureArgs fig;
  CLI::App* figure = app.add_subcommand("figure", "emit rate-curve CSV (and SVG)");
  figure->add_option("--channel", fig.channel, "erasure | depolarizing")
      ->required()
      ->check(CLI::IsMember({"erasure", "depolarizing"}));
  figure->add_option("--d", fig.d, "qudit dimension")->check(CLI::Range(2, 128));
  figure->add_option("--points", fig.points, "grid points")
      ->check(CLI::Range(2, 100000));
  figure->add_option("--out", fig.out, "output CSV path")->required();
  figure->add_option("--plot", fig.plot, "optional SVG path");

  ThresholdArgs th;
  CLI::App* threshold =
      app.add_subcommand("threshold", "key-length threshold report");
  threshold->add_option("--d", th.d)->required()->check(CLI::Range(2, 1 << 20));
  threshold->add_option("--n", th.n)->required()->check(CLI::Range(1, 1 << 20));
  threshold->add_option("--M", th.M)->required()->check(CLI::PositiveNumber);
  threshold->add_option("--eps", th.eps)
      ->required()
      ->check(CLI::Range(1e-9, 0.9999999));
  double weak_p = -1.0;
  threshold->add_option("--weak-p", weak_p, "weak locking: channel parameter p")
      ->check(CLI::Range(0.0, 1.0));
  threshold->add_option("--weak-delta", th.weak_delta)
      ->check(CLI::Range(0.0, 1.0));
  threshold->add_flag("--csv", th.csv, "emit the documented CSV row schema");

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "single-round protocol run");
  simulate->add_option("--d", sim.d)->check(CLI::Range(2, 64));
  simulate->add_option("--n", sim.n)->check(CLI::Range(1, 20));
  simulate->add_option("--M", sim.M)->check(CLI::PositiveNumber);
  simulate->add_option("--K", sim.K)->check(CLI::PositiveNumber);
  simulate->add_option("--channel", sim.channel,
                       "noiseless | erasure:<p> | depolarizing:<p> | pconvex:<p>");
  simulate->add_option("--eve", sim.eve, "basis | random-rank-one | pgm");
  simulate->add_option("--ensemble", sim.ensemble, "haar | basis");
  simulate->add_flag("--distinct", sim.distinct, "distinct basis codewords");
  simulate->add_flag("--weak", sim.weak, "weak-locking Eve (complement output)");
  simulate->add_flag("--eve-knows-key", sim.eve_knows_key,
                     "no-locking control: key public");
  simulate->add_flag("--adjusted-decoder", sim.adjusted_decoder,
                     "PGM on channel-evolved codeword densities");
  simulate->add_flag("--no-bound", sim.no_bound,
                     "skip the accessible-information bound");
  simulate->add_flag("--csv", sim.csv, "emit the documented CSV row schema");
  simulate->add_option("--trials", sim.trials)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--out", sim.out, "write the report to a file");

  BootstrapArgs bs;
  SimulateArgs bs_sim;
  double bsR = -1.0, bsk = -1.0;
  CLI::App* bootstrap =
      app.add_subcommand("bootstrap", "key-recycling ledger over n' rounds");
  bootstrap->add_option("--rounds", bs.rounds, "number of rounds n'")
      ->required()
      ->check(CLI::PositiveNumber);
  bootstrap->add_option("--n", bs.n, "channel uses per round")
      ->check(CLI::PositiveNumber);
  bootstrap->add_option("--R", bsR, "synthetic message rate (bits/use)");
  bootstrap->add_option("--k", bsk, "synthetic key rate (bits/use)");
  bootstrap->add_option("--M", bs_sim.M)->check(CLI::PositiveNumber);
  bootstrap->add_option("--K", bs_sim.K)->check(CLI::PositiveNumber);
  bootstrap->add_option("--d", bs_sim.d)->check(CLI::Range(2, 64));
  bootstrap->add_option("--seed", bs_sim.seed);
  bootstrap->add_option("--out", bs.out, "write the CSV to a file");

  VerifyArgs ver;
  CLI::App* verify = app.add_subcommand("verify", "run a named invariant suite");
  verify->require_subcommand(1);
  auto add_verify_opts = [&](CLI::App* sub) {
    sub->add_option("--d", ver.d)->check(CLI::Range(2, 64));
    sub->add_option("--n", ver.n)->check(CLI::Range(1, 20));
    sub->add_option("--M", ver.M)->check(CLI::PositiveNumber);
    sub->add_option("--K", ver.K)->check(CLI::PositiveNumber);
    sub->add_option("--eps", ver.eps)->check(CLI::Range(1e-9, 0.9999999));
    sub->add_option("--trials", ver.trials)->check(CLI::PositiveNumber);
    sub->add_option("--seed", ver.seed);
  };
  CLI::App* vmoments = verify->add_subcommand("moments", "Haar moment oracles");
  add_verify_opts(vmoments);
  vmoments->add_flag("--csv", ver.csv, "emit the documented CSV row schema");
  CLI::App* vconc =
      verify->add_subcommand("concentration", "tail-bound violation rates");
  add_verify_opts(vconc);
  CLI::App* vchan =
      verify->add_subcommand("channels", "CPTP + isometry + dephasing");
  add_verify_opts(vchan);
  CLI::App* vbound =
      verify->add_subcommand("bound", "accessible-information sandwich");
  add_verify_opts(vbound);
  vbound->add_flag("--weyl", ver.weyl, "exact Weyl-twirl locking case");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kUsage;
  }

  set_thread_count(threads);

  try {
    if (*figure) return cmd_figure(fig);
    if (*threshold) {
      if (weak_p >= 0.0) th.weak_p = weak_p;
      return cmd_threshold(th);
    }
    if (*simulate) return cmd_simulate(sim);
    if (*bootstrap) {
      if (bsR >= 0.0 || bsk >= 0.0) {
        if (bsR < 0.0 || bsk < 0.0)
          throw std::invalid_argument("bootstrap: --R and --k go together");
        bs.R = bsR;
        bs.k = bsk;
      } else {
        bs_sim.n = bs.n;
        bs.sim = bs_sim;
      }
      return cmd_bootstrap(bs);
    }
    if (*verify) {
      if (*vmoments) return verify_moments(ver);
      if (*vconc) return verify_concentration(ver);
      if (*vchan) return verify_channels(ver);
      if (*vbound) return verify_bound(ver);
    }
  } catch (const io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIoError;
  } catch (const protocol_infeasible& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInfeasible;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
