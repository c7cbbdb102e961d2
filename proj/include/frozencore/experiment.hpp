#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "frozencore/bath.hpp"
#include "frozencore/couplings.hpp"
#include "frozencore/lattice.hpp"
#include "frozencore/parallel.hpp"
#include "frozencore/pseudospin.hpp"

namespace frozencore {

enum class BathModel { FarBath, EquivalentPairs, Combined };
enum class QubitPlacement { DonorSite, TargetJ };
enum class T2Method { OneOverE, StretchedExpFit };

inline std::string to_string(BathModel m) {
  switch (m) {
  case BathModel::FarBath: return "far_bath";
  case BathModel::EquivalentPairs: return "equivalent_pairs";
  case BathModel::Combined: return "combined";
  }
  return "?";
}

inline BathModel parse_bath_model(const std::string &s) {
  if (s == "far_bath" || s == "far") return BathModel::FarBath;
  if (s == "equivalent_pairs" || s == "ep") return BathModel::EquivalentPairs;
  if (s == "combined") return BathModel::Combined;
  throw std::invalid_argument("unknown model '" + s + "' (expected far_bath, equivalent_pairs or combined)");
}

inline std::string to_string(QubitPlacement q) { return q == QubitPlacement::DonorSite ? "donor_site" : "target_j"; }
inline std::string to_string(T2Method m) { return m == T2Method::OneOverE ? "one_over_e" : "stretched_exp"; }

struct RunSpec {
  BathModel model = BathModel::EquivalentPairs;
  QubitPlacement placement = QubitPlacement::TargetJ;
  double qubit_target_j = 3.8e6; // Hz; infinity picks the largest coupling
  double abundance = 0.0467;
  int n_realizations = 100;
  std::uint64_t seed = 1;
  double tau_min = 1e-4; // s, inter-pulse delay
  double tau_max = 10.0;
  int tau_points = 200;
  T2Method t2_method = T2Method::OneOverE;
  bool exclude_direct_partner = true;
  EnvelopeMode envelope = EnvelopeMode::FlipFlop;
  FarBathSpec far;
  EPBathSpec ep;
  unsigned threads = 1;

  std::vector<double> tau_grid() const { return make_tau_grid(tau_min, tau_max, tau_points); }

  std::vector<std::uint64_t> seeds() const {
    std::vector<std::uint64_t> out;
    for (int i = 0; i < n_realizations; ++i) out.push_back(seed + static_cast<std::uint64_t>(i));
    return out;
  }

  void validate() const {
    if (n_realizations < 1) throw std::invalid_argument("n_realizations must be >= 1");
    if (!(abundance >= 0.0 && abundance <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
    if (!(qubit_target_j >= 0.0)) throw std::invalid_argument("qubit_target_j must be >= 0");
    (void)tau_grid();
    far.validate();
    ep.validate();
  }
};

// ---------------------------------------------------------------------------
// Qubit placement

/// Lattice site (not necessarily occupied) whose contact J is nearest to
/// target; ties go to smaller |n|, then lexicographically smaller n.
inline IntVec3 nearest_lattice_site_for_J(double target, const DonorConfig &cfg) {
  if (!(target >= 0.0)) throw std::invalid_argument("target J must be >= 0");
  int N = 4;
  if (std::isfinite(target) && target > 0.0) {
    while (contact_J_bound(N * cfg.lattice_constant, cfg) >= target && N < 200) ++N;
    ++N;
  }
  std::optional<IntVec3> best;
  double best_err = std::numeric_limits<double>::infinity();
  for_each_site(N, [&](const LatticeSite &s) {
    if (s.n.is_zero()) return;
    const double j = contact_J(s.n, cfg);
    const double err = std::isinf(target) ? -j : std::fabs(j - target);
    if (!best || err < best_err ||
        (err == best_err && std::make_pair(s.n.norm2(), s.n) < std::make_pair(best->norm2(), *best))) {
      best = s.n;
      best_err = err;
    }
  });
  return *best;
}

/// Occupied site of the realization whose contact J is nearest to target,
/// with the same tie rule.
inline LatticeSite select_qubit_site(const BathRealization &realization, double target, const DonorConfig &cfg) {
  if (!(target >= 0.0)) throw std::invalid_argument("target J must be >= 0");
  std::optional<LatticeSite> best;
  double best_err = std::numeric_limits<double>::infinity();
  for (const auto &s : realization.occupied_sites) {
    if (s.n.is_zero()) continue;
    const double j = contact_J(s.n, cfg);
    const double err = std::isinf(target) ? -j : std::fabs(j - target);
    if (!best || err < best_err ||
        (err == best_err && std::make_pair(s.n.norm2(), s.n) < std::make_pair(best->n.norm2(), best->n))) {
      best = s;
      best_err = err;
    }
  }
  if (!best) throw std::invalid_argument("select_qubit_site: realization has no occupied site");
  return *best;
}

// ---------------------------------------------------------------------------
// Single realization

struct RealizationResult {
  CoherenceCurve curve;
  IntVec3 qubit_site;
  double qubit_j = 0.0;
  std::size_t n_clusters = 0;
  std::uint64_t represented_pairs = 0; // far bath: pairs stood for by the sample
  std::optional<LatticeSite> direct_partner;
};

inline IntVec3 qubit_site_for(const RunSpec &spec, const DonorConfig &cfg) {
  if (spec.placement == QubitPlacement::DonorSite) return IntVec3{0, 0, 0};
  return nearest_lattice_site_for_J(spec.qubit_target_j, cfg);
}

inline RealizationResult run_decay(const RunSpec &spec, std::uint64_t seed, const DonorConfig &cfg) {
  spec.validate();
  cfg.validate();
  const auto grid = spec.tau_grid();
  RealizationResult res;
  res.qubit_site = qubit_site_for(spec, cfg);
  res.qubit_j = spec.placement == QubitPlacement::DonorSite ? spec.qubit_target_j : contact_J(res.qubit_site, cfg);
  ProductOptions popts{QubitKind::Nuclear, spec.envelope, spec.threads, 4096};

  std::vector<double> log_sum(grid.size(), 0.0);
  auto accumulate = [&](const std::vector<PairCluster> &clusters) {
    const auto l = cce2_log_sum(clusters, grid, popts);
    for (std::size_t t = 0; t < grid.size(); ++t) log_sum[t] += l[t];
    res.n_clusters += clusters.size();
  };

  if (spec.model != BathModel::FarBath) {
    if (spec.placement == QubitPlacement::DonorSite)
      throw std::invalid_argument("equivalent-pair model needs a proximate qubit (placement = target_j)");
    const int N = ep_lattice_extent(res.qubit_site, spec.ep, cfg);
    BathRealization lattice = populate(N, spec.abundance, seed);
    lattice.force_occupied(res.qubit_site);
    res.direct_partner = detect_direct_partner(lattice, res.qubit_site, spec.ep, cfg);
    accumulate(build_ep_bath(lattice, res.qubit_site, spec.ep, cfg));
  }
  if (spec.model != BathModel::EquivalentPairs) {
    BathRealization ball = populate_ball(spec.far.r_min, spec.far.r_max, cfg.lattice_constant, spec.abundance, seed);
    const FarBath far = build_far_bath(ball, res.qubit_site, spec.far, cfg, spec.threads);
    res.represented_pairs = far.total_pairs - far.unrepresented_pairs;
    accumulate(far.clusters);
  }
  res.curve = curve_from_log(log_sum, grid);
  res.curve.meta = CurveMeta{to_string(spec.model), seed, res.qubit_j, 0};
  return res;
}

// ---------------------------------------------------------------------------
// T2 extraction

class GridTooShortError : public std::runtime_error {
public:
  GridTooShortError(double last_time, double last_value)
      : std::runtime_error(message(last_time, last_value)), last_value_(last_value) {}
  double last_value() const { return last_value_; }

private:
  static std::string message(double t, double v) {
    std::ostringstream os;
    os << "grid too short: coherence never falls below 1/e (last value " << v << " at t = " << t << " s)";
    return os.str();
  }
  double last_value_;
};

/// First crossing of 1/e, linearly interpolated between grid points.
inline double t2_one_over_e(const CoherenceCurve &curve) {
  if (curve.times.size() != curve.values.size() || curve.times.empty())
    throw std::invalid_argument("extract_T2: malformed curve");
  const double target = std::exp(-1.0);
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    if (curve.values[i] < target) {
      if (i == 0) return curve.times[0];
      const double t0 = curve.times[i - 1], t1 = curve.times[i];
      const double v0 = curve.values[i - 1], v1 = curve.values[i];
      return t0 + (v0 - target) / (v0 - v1) * (t1 - t0);
    }
  }
  throw GridTooShortError(curve.times.back(), curve.values.back());
}

struct StretchedFit {
  double t2 = 0.0;
  double exponent = 1.0;
};

/// Least-squares fit of exp[-(t/T2)^n] to the decaying part of the curve.
inline StretchedFit fit_stretched_exp(const CoherenceCurve &curve) {
  std::vector<double> ts, vs;
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    if (curve.times[i] > 0.0 && curve.values[i] > 0.02 && curve.values[i] < 0.98) {
      ts.push_back(curve.times[i]);
      vs.push_back(curve.values[i]);
    }
  }
  if (ts.size() < 2) {
    if (curve.values.empty() || curve.values.back() >= std::exp(-1.0))
      throw GridTooShortError(curve.times.empty() ? 0.0 : curve.times.back(), curve.values.empty() ? 1.0 : curve.values.back());
    throw std::runtime_error("stretched-exponential fit: fewer than two points in the decay window");
  }
  // Linearized start: ln(-ln L) = n ln t - n ln T2.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double x = std::log(ts[i]), y = std::log(-std::log(vs[i]));
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  double n = denom != 0.0 ? (m * sxy - sx * sy) / denom : 1.0;
  if (!(n > 0.0)) n = 1.0;
  double log_t2 = (n * sx - sy) / (n * m);

  auto sse = [&](double nn, double lt) {
    double s = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double r = vs[i] - std::exp(-std::pow(ts[i] / std::exp(lt), nn));
      s += r * r;
    }
    return s;
  };
  // Gauss-Newton in (n, ln T2) with step halving.
  double cost = sse(n, log_t2);
  for (int iter = 0; iter < 50; ++iter) {
    double a11 = 0, a12 = 0, a22 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double u = std::log(ts[i]) - log_t2;
      const double q = std::exp(n * u);
      const double model = std::exp(-q);
      const double r = vs[i] - model;
      const double dn = model * q * u;   // d model / d n
      const double dl = -model * q * n;  // d model / d ln T2
      a11 += dn * dn; a12 += dn * dl; a22 += dl * dl;
      g1 += dn * r; g2 += dl * r;
    }
    const double det = a11 * a22 - a12 * a12;
    if (!(std::fabs(det) > 0.0)) break;
    double step_n = (a22 * g1 - a12 * g2) / det;
    double step_l = (a11 * g2 - a12 * g1) / det;
    double scale = 1.0;
    bool improved = false;
    for (int h = 0; h < 30; ++h) {
      const double nn = n + scale * step_n, ll = log_t2 + scale * step_l;
      if (nn > 0.0) {
        const double c = sse(nn, ll);
        if (c < cost) {
          n = nn;
          log_t2 = ll;
          improved = cost - c > 1e-15 * std::max(1.0, cost);
          cost = c;
          break;
        }
      }
      scale *= 0.5;
    }
    if (!improved) break;
  }
  return {std::exp(log_t2), n};
}

inline double extract_T2(const CoherenceCurve &curve, T2Method method) {
  return method == T2Method::OneOverE ? t2_one_over_e(curve) : fit_stretched_exp(curve).t2;
}

// ---------------------------------------------------------------------------
// Ensembles

struct T2Result {
  double t2 = 0.0; // s, from the ensemble-mean curve
  T2Method method = T2Method::OneOverE;
  std::optional<StretchedFit> stretched; // diagnostic fit of the mean curve
  std::vector<std::uint64_t> seeds;          // realizations kept
  std::vector<double> per_realization_t2;    // NaN where the grid was too short
  std::vector<std::uint64_t> excluded_seeds; // direct-partner realizations left out
  CoherenceCurve curve;                      // ensemble mean
  IntVec3 qubit_site;
  double qubit_j = 0.0;
  double mean_clusters = 0.0;
};

inline T2Result ensemble_average(const RunSpec &spec, const std::vector<std::uint64_t> &seeds, const DonorConfig &cfg) {
  if (seeds.empty()) throw std::invalid_argument("ensemble_average: need at least one seed");
  spec.validate();
  std::vector<RealizationResult> runs(seeds.size());
  if (spec.model == BathModel::EquivalentPairs) {
    RunSpec inner = spec;
    inner.threads = 1;
    parallel_for_chunks(seeds.size(), spec.threads, [&](std::size_t i) { runs[i] = run_decay(inner, seeds[i], cfg); });
  } else {
    for (std::size_t i = 0; i < seeds.size(); ++i) runs[i] = run_decay(spec, seeds[i], cfg);
  }

  T2Result out;
  out.method = spec.t2_method;
  out.qubit_site = runs.front().qubit_site;
  out.qubit_j = runs.front().qubit_j;
  const std::size_t n_tau = runs.front().curve.times.size();
  std::vector<CompensatedSum> acc(n_tau);
  double clusters = 0.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (spec.exclude_direct_partner && runs[i].direct_partner) {
      out.excluded_seeds.push_back(seeds[i]);
      continue;
    }
    out.seeds.push_back(seeds[i]);
    for (std::size_t t = 0; t < n_tau; ++t) acc[t].add(runs[i].curve.values[t]);
    clusters += static_cast<double>(runs[i].n_clusters);
    double t2 = std::numeric_limits<double>::quiet_NaN();
    try {
      t2 = extract_T2(runs[i].curve, spec.t2_method);
    } catch (const std::runtime_error &) {
    }
    out.per_realization_t2.push_back(t2);
  }
  if (out.seeds.empty())
    throw std::runtime_error("ensemble_average: every realization was excluded for a direct equivalent partner");
  const double k = static_cast<double>(out.seeds.size());
  out.mean_clusters = clusters / k;
  out.curve.times = runs.front().curve.times;
  out.curve.values.resize(n_tau);
  for (std::size_t t = 0; t < n_tau; ++t) out.curve.values[t] = acc[t].value() / k;
  out.curve.meta = CurveMeta{to_string(spec.model), out.seeds.front(), out.qubit_j, -1};
  out.t2 = extract_T2(out.curve, spec.t2_method);
  try {
    out.stretched = fit_stretched_exp(out.curve);
  } catch (const std::runtime_error &) {
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { C12Window, BathRadius };

inline std::string to_string(SweepAxis a) { return a == SweepAxis::C12Window ? "c12_min" : "r_max"; }

struct SweepRow {
  double value = 0.0;
  double t2 = 0.0;
  double relative_change = 0.0; // against the previous row
  std::uint64_t represented_pairs = 0;
  CoherenceCurve curve;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::BathRadius;
  std::vector<SweepRow> rows;
  double converged_value = 0.0; // first value after which every step changes T2 by < tolerance
  bool converged = false;
  double tolerance = 0.05;
};

/// Far-bath T2 as the radius (r_max) or the lower edge of the |C12| window
/// (c12_min) takes each of `values` in the given order.
inline SweepResult convergence_sweep(const RunSpec &spec, SweepAxis axis, const std::vector<double> &values,
                                     const std::vector<std::uint64_t> &seeds, const DonorConfig &cfg,
                                     double tolerance = 0.05) {
  if (spec.model != BathModel::FarBath) throw std::invalid_argument("convergence_sweep: needs the far_bath model");
  if (values.empty()) throw std::invalid_argument("convergence_sweep: no sweep values");
  SweepResult out;
  out.axis = axis;
  out.tolerance = tolerance;
  for (double v : values) {
    RunSpec s = spec;
    if (axis == SweepAxis::BathRadius) s.far.r_max = v;
    else s.far.c12_min = v;
    const T2Result r = ensemble_average(s, seeds, cfg);
    SweepRow row;
    row.value = v;
    row.t2 = r.t2;
    row.curve = r.curve;
    if (!out.rows.empty()) row.relative_change = std::fabs(r.t2 - out.rows.back().t2) / out.rows.back().t2;
    out.rows.push_back(std::move(row));
  }
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    bool stable = true;
    for (std::size_t j = k + 1; j < out.rows.size(); ++j) stable = stable && out.rows[j].relative_change < tolerance;
    if (stable) {
      out.converged = true;
      out.converged_value = out.rows[k].value;
      break;
    }
  }
  return out;
}

struct TrendRow {
  double target_j = 0.0;
  IntVec3 qubit_site;
  double qubit_j = 0.0;
  double t2 = 0.0;
  std::size_t kept = 0;
  std::size_t excluded = 0;
};

struct TrendResult {
  std::vector<TrendRow> rows; // sorted by target J
  double slope = 0.0;         // s per Hz, least squares of T2 against target J
  double intercept = 0.0;
};

inline TrendResult j_trend_study(const RunSpec &spec, std::vector<double> j_values,
                                 const std::vector<std::uint64_t> &seeds, const DonorConfig &cfg) {
  if (j_values.empty()) throw std::invalid_argument("j_trend_study: no J values");
  std::sort(j_values.begin(), j_values.end());
  j_values.erase(std::unique(j_values.begin(), j_values.end()), j_values.end());
  TrendResult out;
  for (double j : j_values) {
    RunSpec s = spec;
    s.placement = QubitPlacement::TargetJ;
    s.qubit_target_j = j;
    const T2Result r = ensemble_average(s, seeds, cfg);
    out.rows.push_back({j, r.qubit_site, r.qubit_j, r.t2, r.seeds.size(), r.excluded_seeds.size()});
  }
  if (out.rows.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(out.rows.size());
    for (const auto &r : out.rows) {
      sx += r.target_j; sy += r.t2; sxx += r.target_j * r.target_j; sxy += r.target_j * r.t2;
    }
    out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    out.intercept = (sy - out.slope * sx) / m;
  } else {
    out.intercept = out.rows.front().t2;
  }
  return out;
}

} // namespace frozencore
