// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "frozencore/exact_oracle.hpp"
#include "frozencore/frozencore.hpp"
#include "two_level_oracle.hpp"

using namespace frozencore;

namespace {

int failures = 0;

void report(int id, const std::string &name, bool pass, const std::string &detail, double seconds) {
  std::printf("%s C%d %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char *f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

class Timer {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double signed_log_uniform(std::mt19937_64 &rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  std::bernoulli_distribution sign(0.5);
  return (sign(rng) ? -1.0 : 1.0) * std::exp(u(rng));
}

CoherenceCurve mean_curve(const std::vector<CoherenceCurve> &curves) {
  CoherenceCurve m = curves.front();
  for (std::size_t t = 0; t < m.values.size(); ++t) {
    double s = 0.0;
    for (const auto &c : curves) s += c.values[t];
    m.values[t] = s / static_cast<double>(curves.size());
  }
  return m;
}

void combinatorics() {
  Timer t;
  bool ok = true;
  for (int N = 1; N <= 12; ++N) ok = ok && shell_counts_closed_form(N) == shell_counts_enumerated(N);
  report(1, "shell counts closed form vs enumeration", ok, "N = 1..12, all multiplicities and class rows", t.seconds());
}

void binomial() {
  Timer t;
  double worst = 0.0;
  for (int ns : {4, 6, 8, 12, 24, 48})
    for (double p : {0.0, 0.0467, 0.5, 1.0}) {
      const auto e = expected_pairs_per_shell(ns, p);
      worst = std::max(worst, std::fabs(e.sum - e.analytic) / std::max(1.0, e.analytic));
    }
  const double z24 = zeta(24, 0.0467);
  report(2, "binomial pair expectation", worst <= 1e-12 && std::fabs(z24 - 0.60) < 0.01,
         fmt("max rel dev %.2e, zeta24 = %.4f", worst, z24), t.seconds());
}

void ep_count(const DonorConfig &cfg) {
  Timer t;
  const int N = extent_for_radius(100.0, cfg.lattice_constant);
  const double n = total_ep_count(N, 0.0467);
  report(3, "equivalent pairs within 100 A", n >= 13300.0 && n <= 24700.0,
         fmt("N = %.0f, N_EP = %.1f, window [13300, 24700]", N, n), t.seconds());
}

void density(const DonorConfig &cfg) {
  Timer t;
  double lo = 1e9, hi = -1e9;
  for (int N = 10; N <= 20; ++N) {
    const double d = total_density(N, 0.0467, CensusMode::Isotropic, cfg.lattice_constant);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  report(4, "isotropic pair density plateau", lo >= 0.2 && hi <= 0.35,
         fmt("D over N = 10..20 in [%.4f, %.4f], window [0.2, 0.35]", lo, hi), t.seconds());
}

void oracle_agreement(const DonorConfig &cfg) {
  Timer t;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> tau(0.0, 10.0);
  double worst_rel = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double dp = signed_log_uniform(rng, 1e-3, 10.0), dm = signed_log_uniform(rng, 1e-3, 10.0);
    const double c = signed_log_uniform(rng, 1e-3, 10.0);
    const double x = tau(rng);
    const double closed = hahn_envelope(make_params(Detunings{dp, dm}, c), x);
    const double exact = oracle2::echo(dp, dm, c, x);
    worst_rel = std::max(worst_rel, std::fabs(closed - exact) / exact);
  }

  const EPBathSpec ep;
  const IntVec3 q{-4, 0, 0};
  std::vector<PairCluster> draws;
  for (std::uint64_t s = 1; draws.size() < 100; ++s) {
    auto lattice = populate(ep_lattice_extent(q, ep, cfg), 0.0467, s);
    lattice.force_occupied(q);
    for (const auto &c : build_ep_bath(lattice, q, ep, cfg))
      if (draws.size() < 100) draws.push_back(c);
  }
  double worst_abs = 0.0;
  for (const auto &c : draws) {
    OracleOptions opts;
    opts.model = OracleModel::FullHyperfine;
    opts.c12_dipolar = nuclear_dipolar(to_position(c.site1, cfg.lattice_constant),
                                       to_position(c.site2, cfg.lattice_constant), cfg);
    for (double x : {1e-3, 1e-2, 0.03, 0.1, 0.3, 1.0})
      worst_abs = std::max(worst_abs, std::fabs(exact_pair_oracle(c, QubitKind::Nuclear, cfg, x, opts) -
                                                hahn_envelope(make_params(c, QubitKind::Nuclear), x)));
  }
  report(5, "envelope vs exact oracles", worst_rel <= 1e-12 && worst_abs < 1e-2,
         fmt("2-level max rel dev %.2e (tol 1e-12), multi-spin max abs dev %.2e (tol 1e-2)", worst_rel, worst_abs),
         t.seconds());
}

RunSpec far_spec(unsigned threads) {
  RunSpec s;
  s.model = BathModel::FarBath;
  s.placement = QubitPlacement::DonorSite;
  s.threads = threads;
  return s;
}

void far_bath(const DonorConfig &cfg, unsigned threads) {
  Timer t6;
  const RunSpec spec = far_spec(threads);
  std::vector<CoherenceCurve> curves;
  std::vector<double> t2;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    curves.push_back(run_decay(spec, seed, cfg).curve);
    t2.push_back(t2_one_over_e(curves.back()));
  }
  const double headline = t2_one_over_e(mean_curve(curves));
  report(6, "far-bath T2n", headline >= 1.0 && headline <= 4.0,
         fmt("T2n = %.4f s over 10 seeds, window [1, 4] s", headline), t6.seconds());

  double mean = 0.0, var = 0.0;
  for (double v : t2) mean += v / t2.size();
  for (double v : t2) var += (v - mean) * (v - mean) / (t2.size() - 1);
  const double cv = std::sqrt(var) / mean;

  Timer t7;
  const std::vector<CoherenceCurve> base(curves.begin(), curves.begin() + 3);
  const double t2_base = t2_one_over_e(mean_curve(base));
  auto variant = [&](auto tweak) {
    RunSpec s = spec;
    tweak(s);
    std::vector<CoherenceCurve> c;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) c.push_back(run_decay(s, seed, cfg).curve);
    return t2_one_over_e(mean_curve(c));
  };
  const double t2_radius = variant([](RunSpec &s) { s.far.r_max = 450.0; });
  const double t2_window = variant([](RunSpec &s) { s.far.c12_min = 0.001; });
  const double d_radius = std::fabs(t2_radius - t2_base) / t2_base;
  const double d_window = std::fabs(t2_window - t2_base) / t2_base;
  report(7, "far-bath convergence", d_radius < 0.10 && d_window < 0.10,
         fmt("seeds 1-3: T2n %.4f s; r_max 450 A change %.2f%%, c12_min 0.001 Hz change %.2f%% (tol 10%%)", t2_base,
             100 * d_radius, 100 * d_window),
         t7.seconds());

  report(8, "far-bath seed insensitivity", cv < 0.02, fmt("CV of T2n over 10 seeds = %.3f%% (tol 2%%)", 100 * cv),
         t6.seconds());
}

void equivalent_pairs(const DonorConfig &cfg, unsigned threads) {
  Timer t;
  RunSpec s;
  s.threads = threads;
  s.n_realizations = 100;
  std::string detail;
  bool ok = true;
  for (double j : {0.1e6, 3.8e6}) {
    s.qubit_target_j = j;
    s.ep.anisotropy = AnisotropyMode::IsotropicOnly;
    const auto iso = ensemble_average(s, s.seeds(), cfg);
    s.ep.anisotropy = AnisotropyMode::AnisotropyFiltered;
    const auto filt = ensemble_average(s, s.seeds(), cfg);
    ok = ok && iso.t2 >= 0.1 && iso.t2 <= 0.5 && filt.t2 > iso.t2 && filt.t2 >= 0.5 && filt.t2 <= 5.0;
    detail += fmt("J %.1f MHz: isotropic %.4f s [0.1, 0.5], filtered %.4f s [0.5, 5]; ", j / 1e6, iso.t2, filt.t2);
  }
  detail.resize(detail.size() - 2);
  report(9, "equivalent-pair T2n", ok, detail, t.seconds());
}

void j_trend(const DonorConfig &cfg, unsigned threads) {
  Timer t;
  RunSpec s;
  s.threads = threads;
  const auto tr = j_trend_study(s, {0.1e6, 0.3e6, 0.5e6, 0.7e6, 1e6, 3.8e6}, s.seeds(), cfg);
  std::string rows;
  for (const auto &r : tr.rows) rows += fmt(" %.4f", r.t2);
  report(10, "T2n trend with J", tr.slope > 0.0, fmt("slope %.3e s/MHz, T2n:", tr.slope * 1e6) + rows + " s",
         t.seconds());
}

void properties(const DonorConfig &cfg) {
  Timer t;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> tau(0.0, 100.0);
  bool bounded = true;
  for (int i = 0; i < 100000; ++i) {
    const auto p = make_params(Detunings{signed_log_uniform(rng, 1e-4, 1e4), signed_log_uniform(rng, 1e-4, 1e4)},
                               signed_log_uniform(rng, 1e-4, 1e4));
    const double l = hahn_envelope(p, tau(rng));
    bounded = bounded && l >= 0.0 && l <= 1.0 + 1e-15;
  }

  bool uncoupled = true;
  for (int i = 0; i < 1000; ++i) {
    const auto p = make_params(Detunings{signed_log_uniform(rng, 1e-4, 1e4), signed_log_uniform(rng, 1e-4, 1e4)}, 0.0);
    uncoupled = uncoupled && hahn_envelope(p, tau(rng)) == 1.0;
  }

  std::vector<PairCluster> clusters;
  for (int i = 0; i < 50; ++i) {
    PairCluster c;
    c.j1 = signed_log_uniform(rng, 1e-2, 5.0);
    c.j2 = signed_log_uniform(rng, 1e-2, 5.0);
    c.c1a = signed_log_uniform(rng, 1e-3, 2.0);
    c.c2a = signed_log_uniform(rng, 1e-3, 2.0);
    c.c12 = signed_log_uniform(rng, 1e-3, 2.0);
    clusters.push_back(c);
  }
  const auto grid = make_tau_grid(1e-3, 10.0, 60);
  const auto single = cce2_product(clusters, grid);
  auto doubled = clusters;
  doubled.insert(doubled.end(), clusters.begin(), clusters.end());
  auto weighted = clusters;
  for (auto &c : weighted) c.weight = 2.0;
  const auto dup = cce2_product(doubled, grid), wtd = cce2_product(weighted, grid);
  bool product = true;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double direct = 1.0;
    for (const auto &c : clusters) direct *= hahn_envelope(make_params(c, QubitKind::Nuclear), grid[k]);
    product = product && std::fabs(single.values[k] - direct) <= 1e-12 * std::max(direct, 1e-300) + 1e-300;
    const double sq = single.values[k] * single.values[k];
    product = product && std::fabs(dup.values[k] - sq) <= 1e-12 * sq + 1e-300 &&
              std::fabs(wtd.values[k] - sq) <= 1e-12 * sq + 1e-300;
  }

  RunSpec s;
  s.n_realizations = 20;
  std::string bytes[2];
  for (auto &b : bytes) {
    const auto r = ensemble_average(s, s.seeds(), cfg);
    b = curve_table(r.curve).render({sha256_hex(emit_config(Config{})), r.seeds, {}}) +
        census_table({shell_counts_closed_form(6)}).render({});
  }
  const bool deterministic = bytes[0] == bytes[1];

  report(11, "property suites", bounded && uncoupled && product && deterministic,
         std::string("bounds ") + (bounded ? "ok" : "violated") + ", C12=0 " + (uncoupled ? "ok" : "violated") +
             ", product/duplication " + (product ? "ok" : "violated") + ", repeat run " +
             (deterministic ? "byte-identical" : "differs"),
         t.seconds());
}

void frozen_core(const DonorConfig &cfg) {
  Timer t;
  const auto r = frozen_core_radius(127.0, cfg);
  report(12, "frozen-core radius", r.radius >= 64.0 && r.radius <= 96.0,
         fmt("R_FC = %.1f A at 127 Hz, window [64, 96] A", r.radius), t.seconds());
}

} // namespace

int main() {
  const DonorConfig cfg;
  const unsigned threads = resolve_threads(0);
  try {
    combinatorics();
    binomial();
    ep_count(cfg);
    density(cfg);
    oracle_agreement(cfg);
    far_bath(cfg, threads);
    equivalent_pairs(cfg, threads);
    j_trend(cfg, threads);
    properties(cfg);
    frozen_core(cfg);
  } catch (const std::exception &e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
