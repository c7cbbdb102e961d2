#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "frozencore/parallel.hpp"
#include "frozencore/types.hpp"

namespace frozencore {

enum class ClusterKind { FarBath, EquivalentPair };
enum class QubitKind { Electron, Nuclear };

inline std::string to_string(ClusterKind k) { return k == ClusterKind::FarBath ? "far_bath" : "equivalent_pair"; }

/// Two bath nuclei with their couplings to the electron (j1, j2), to the
/// nuclear qubit A (c1a, c2a) and to each other (c12, including the
/// electron-mediated term). All couplings in Hz.
struct PairCluster {
  IntVec3 site1;
  IntVec3 site2;
  double j1 = 0.0;
  double j2 = 0.0;
  double c1a = 0.0;
  double c2a = 0.0;
  double c12 = 0.0;
  ClusterKind kind = ClusterKind::FarBath;
  double weight = 1.0; // inflation weight when the cluster stands for a sampled stratum
};

struct Detunings {
  double plus = 0.0;
  double minus = 0.0;
};

inline Detunings detunings(const PairCluster &c, QubitKind qubit) {
  const double electron = c.j1 - c.j2;
  if (qubit == QubitKind::Electron) return {electron, -electron};
  const double nuclear = c.c1a - c.c2a;
  return {electron + nuclear, electron - nuclear};
}

/// Detunings, flip-flop frequencies (Hz, omega = sqrt(Delta^2 + C^2)/4) and
/// mixing angles theta = atan2(C12, Delta) of the two qubit branches.
struct PseudospinParams {
  double delta_plus = 0.0;
  double delta_minus = 0.0;
  double omega_plus = 0.0;
  double omega_minus = 0.0;
  double theta_plus = 0.0;
  double theta_minus = 0.0;
  double c12 = 0.0;
};

inline PseudospinParams make_params(const Detunings &d, double c12) {
  if (c12 == 0.0) c12 = 0.0; // fold -0.0 so theta stays in (-pi, pi]
  PseudospinParams p;
  p.delta_plus = d.plus;
  p.delta_minus = d.minus;
  p.c12 = c12;
  p.omega_plus = 0.25 * std::hypot(d.plus, c12);
  p.omega_minus = 0.25 * std::hypot(d.minus, c12);
  p.theta_plus = std::atan2(c12, d.plus);
  p.theta_minus = std::atan2(c12, d.minus);
  return p;
}

inline PseudospinParams make_params(const PairCluster &c, QubitKind qubit) {
  return make_params(detunings(c, qubit), c.c12);
}

enum class EnvelopeMode {
  FlipFlop, // |1 - 2 alpha (alpha + i beta)|, the {up-down, down-up} manifold
  Thermal,  // 1 - alpha^2, averaged over all four unpolarized pair states
};

namespace detail {

/// Per-cluster quantities reused across the time grid.
struct EchoKernel {
  double w_plus = 0.0;  // angular, rad/s
  double w_minus = 0.0;
  double sin_diff = 0.0;
  double sin_plus = 0.0;
  double sin_minus = 0.0;

  explicit EchoKernel(const PseudospinParams &p)
      : w_plus(2.0 * std::numbers::pi * p.omega_plus), w_minus(2.0 * std::numbers::pi * p.omega_minus),
        sin_diff(std::sin(p.theta_plus - p.theta_minus)), sin_plus(std::sin(p.theta_plus)),
        sin_minus(std::sin(p.theta_minus)) {}

  void alpha_beta(double tau, double &alpha, double &beta) const {
    const double sp = std::sin(w_plus * tau), cp = std::cos(w_plus * tau);
    const double sm = std::sin(w_minus * tau), cm = std::cos(w_minus * tau);
    alpha = sp * sm * sin_diff;
    beta = sp * cm * sin_plus + sm * cp * sin_minus;
  }

  /// ln of the envelope, accurate for envelopes close to 1.
  double log_envelope(double tau, EnvelopeMode mode) const {
    double a, b;
    alpha_beta(tau, a, b);
    if (mode == EnvelopeMode::Thermal) return std::log1p(-a * a);
    // |1 - 2a(a + ib)|^2 = 1 + 4a^2 (a^2 + b^2 - 1)
    return 0.5 * std::log1p(4.0 * a * a * (a * a + b * b - 1.0));
  }
};

} // namespace detail

/// Hahn-echo envelope of one pair after the sequence tau - pi - tau; tau in s.
inline double hahn_envelope(const PseudospinParams &p, double tau) {
  if (tau < 0.0) throw std::invalid_argument("hahn_envelope: tau must be >= 0");
  double a, b;
  detail::EchoKernel(p).alpha_beta(tau, a, b);
  return std::abs(std::complex<double>(1.0 - 2.0 * a * a, -2.0 * a * b));
}

inline double thermal_envelope(const PseudospinParams &p, double tau) {
  if (tau < 0.0) throw std::invalid_argument("thermal_envelope: tau must be >= 0");
  double a, b;
  detail::EchoKernel(p).alpha_beta(tau, a, b);
  return 1.0 - a * a;
}

struct CurveMeta {
  std::string model;
  std::uint64_t seed = 0;
  double qubit_j = 0.0; // Hz
  int realization = 0;
};

/// times are total echo times 2 tau (s); values are |<L>|.
struct CoherenceCurve {
  std::vector<double> times;
  std::vector<double> values;
  CurveMeta meta;
};

/// tau grid: 0 followed by (points - 1) log-spaced delays in [tau_min, tau_max].
inline std::vector<double> make_tau_grid(double tau_min, double tau_max, int points) {
  if (points < 2) throw std::invalid_argument("tau grid needs at least 2 points");
  if (!(tau_min > 0.0) || !(tau_max > tau_min)) throw std::invalid_argument("tau grid needs 0 < tau_min < tau_max");
  std::vector<double> grid{0.0};
  const int logs = points - 1;
  const double lo = std::log10(tau_min), hi = std::log10(tau_max);
  for (int i = 0; i < logs; ++i) {
    const double f = logs == 1 ? 1.0 : static_cast<double>(i) / (logs - 1);
    grid.push_back(std::pow(10.0, lo + f * (hi - lo)));
  }
  return grid;
}

inline constexpr double kLogUnderflowFloor = -700.0;

struct ProductOptions {
  QubitKind qubit = QubitKind::Nuclear;
  EnvelopeMode mode = EnvelopeMode::FlipFlop;
  unsigned threads = 1;
  std::size_t chunk_size = 4096;
};

/// Weighted sum of per-cluster log envelopes on the tau grid.
inline std::vector<double> cce2_log_sum(std::span<const PairCluster> clusters, std::span<const double> tau_grid,
                                        const ProductOptions &opts = {}) {
  const std::size_t n_tau = tau_grid.size();
  const std::size_t chunk = std::max<std::size_t>(1, opts.chunk_size);
  const std::size_t n_chunks = (clusters.size() + chunk - 1) / chunk;
  std::vector<std::vector<CompensatedSum>> partial(n_chunks);
  parallel_for_chunks(n_chunks, opts.threads, [&](std::size_t c) {
    auto &acc = partial[c];
    acc.assign(n_tau, CompensatedSum{});
    const std::size_t end = std::min(clusters.size(), (c + 1) * chunk);
    for (std::size_t i = c * chunk; i < end; ++i) {
      const detail::EchoKernel k(make_params(clusters[i], opts.qubit));
      const double w = clusters[i].weight;
      for (std::size_t t = 0; t < n_tau; ++t) acc[t].add(w * k.log_envelope(tau_grid[t], opts.mode));
    }
  });
  std::vector<CompensatedSum> total(n_tau);
  for (const auto &acc : partial)
    for (std::size_t t = 0; t < n_tau; ++t) total[t].add(acc[t]);
  std::vector<double> out(n_tau);
  for (std::size_t t = 0; t < n_tau; ++t) out[t] = total[t].value();
  return out;
}

inline CoherenceCurve curve_from_log(std::span<const double> log_values, std::span<const double> tau_grid) {
  CoherenceCurve curve;
  curve.times.reserve(tau_grid.size());
  curve.values.reserve(tau_grid.size());
  for (std::size_t t = 0; t < tau_grid.size(); ++t) {
    curve.times.push_back(2.0 * tau_grid[t]);
    curve.values.push_back(log_values[t] < kLogUnderflowFloor ? 0.0 : std::exp(log_values[t]));
  }
  return curve;
}

/// <L(tau)> = prod_l L_l(tau), accumulated in log space. An empty cluster list
/// gives the constant curve 1.
inline CoherenceCurve cce2_product(std::span<const PairCluster> clusters, std::span<const double> tau_grid,
                                   const ProductOptions &opts = {}) {
  if (tau_grid.empty()) throw std::invalid_argument("cce2_product: empty tau grid");
  for (std::size_t t = 0; t < tau_grid.size(); ++t) {
    if (tau_grid[t] < 0.0 || (t > 0 && !(tau_grid[t] > tau_grid[t - 1])))
      throw std::invalid_argument("cce2_product: tau grid must be non-negative and strictly increasing");
  }
  const auto logs = cce2_log_sum(clusters, tau_grid, opts);
  return curve_from_log(logs, tau_grid);
}

} // namespace frozencore
