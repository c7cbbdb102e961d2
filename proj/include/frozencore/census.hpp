#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "frozencore/lattice.hpp"

namespace frozencore {

inline constexpr std::array<int, 6> kMultiplicities{48, 24, 12, 8, 6, 4};

inline std::size_t multiplicity_slot(int ns) {
  for (std::size_t i = 0; i < kMultiplicities.size(); ++i)
    if (kMultiplicities[i] == ns) return i;
  throw std::invalid_argument("unknown shell multiplicity " + std::to_string(ns));
}

/// Shell counts per multiplicity and, per basis class, the number of sites
/// lying in shells of that multiplicity.
struct ShellCensus {
  int N = 0;
  std::array<std::int64_t, 6> shells{};                 // indexed like kMultiplicities
  std::array<std::array<std::int64_t, 6>, 3> class_sites{}; // [class][multiplicity]

  std::int64_t count(int ns) const { return shells[multiplicity_slot(ns)]; }
  std::int64_t class_count(BasisClass c, int ns) const {
    return class_sites[static_cast<std::size_t>(c)][multiplicity_slot(ns)];
  }
  bool operator==(const ShellCensus &) const = default;
};

inline ShellCensus shell_counts_closed_form(int N) {
  if (N < 1) throw std::invalid_argument("shell census: N must be >= 1");
  const std::int64_t n = N;
  ShellCensus c;
  c.N = N;
  // The numerators are divisible by 3 for every integer N.
  c.shells = {(2 * n * n * n - 3 * n * n + n) / 3, (4 * n * (n * n - 1) + 3 * n * n) / 3, 4 * n * n, n, n, 2 * n};
  auto &c1 = c.class_sites[0];
  auto &c2 = c.class_sites[1];
  auto &c3 = c.class_sites[2];
  c1 = {24 * n * n * (n - 1), 12 * n * (3 * n - 1), 12 * n, 0, 0, 0};
  c2 = {8 * n * (n - 1) * (n - 2), 36 * n * (n - 1), 12 * n, 8 * n, 6 * n, 0};
  c3 = {0, 16 * n * (n - 1) * (2 * n - 1), 24 * n * (2 * n - 1), 0, 0, 8 * n};
  return c;
}

/// Orbit counting over generate_sites(N).
inline ShellCensus shell_counts_enumerated(int N) {
  if (N < 1) throw std::invalid_argument("shell census: N must be >= 1");
  if (N > 25) throw std::invalid_argument("shell census: enumeration limited to N <= 25");
  std::map<ShellKey, std::int64_t> members;
  std::vector<std::pair<ShellKey, BasisClass>> tagged;
  for_each_site(N, [&](const LatticeSite &s) {
    if (s.n.is_zero()) return;
    const ShellKey k = classify_shell(s.n);
    ++members[k];
    tagged.emplace_back(k, s.basis_class);
  });
  ShellCensus c;
  c.N = N;
  for (const auto &[k, m] : members) ++c.shells[multiplicity_slot(static_cast<int>(m))];
  for (const auto &[k, cls] : tagged)
    ++c.class_sites[static_cast<std::size_t>(cls)][multiplicity_slot(static_cast<int>(members.at(k)))];
  return c;
}

inline double binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  // Exact in double while C(n, k) * n stays below 2^53.
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

struct PairExpectation {
  double sum = 0.0;      // sum_k C(ns,k) p^k (1-p)^(ns-k) k(k-1)/2
  double analytic = 0.0; // C(ns,2) p^2
};

inline PairExpectation expected_pairs_per_shell(int ns, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("expected_pairs_per_shell: p must lie in [0, 1]");
  if (ns < 0) throw std::invalid_argument("expected_pairs_per_shell: ns must be >= 0");
  PairExpectation out;
  double acc = 0.0;
  for (int k = 2; k <= ns; ++k) {
    const double prob = binomial_coefficient(ns, k) * std::pow(p, k) * std::pow(1.0 - p, ns - k);
    acc += prob * 0.5 * k * (k - 1);
  }
  out.sum = acc;
  out.analytic = 0.5 * ns * (ns - 1) * p * p;
  return out;
}

inline double zeta(int ns, double p) { return expected_pairs_per_shell(ns, p).analytic; }

/// Expected number of equivalent pairs for lattice extent N.
inline double total_ep_count(int N, double p) {
  const ShellCensus c = shell_counts_closed_form(N);
  double total = 0.0;
  for (std::size_t i = 0; i < kMultiplicities.size(); ++i) total += zeta(kMultiplicities[i], p) * c.shells[i];
  return total;
}

/// Extent whose half-width N a0 is closest to radius R.
inline int extent_for_radius(double radius, double lattice_constant) {
  return std::max(1, static_cast<int>(std::lround(radius / lattice_constant)));
}

enum class CensusMode { Isotropic, AnisotropyFiltered };

struct DensityRow {
  int N = 0;
  double radius = 0.0; // N a0, Angstrom
  int ns = 0;          // effective multiplicity; 0 marks the total row
  double shells = 0.0; // effective shell count
  double zeta = 0.0;
  double density = 0.0; // pairs per cubic cell
};

/// D = zeta_ns N_ns / (2N)^3 for N in [1, N_max], one row per multiplicity
/// followed by a total row (ns = 0). The filtered mode splits each shell of
/// 48, 24 or 12 into three sub-shells of a third of the size.
inline std::vector<DensityRow> ep_density_profile(int N_max, double p, CensusMode mode, double lattice_constant) {
  if (N_max < 2) throw std::invalid_argument("ep_density_profile: N_max must be >= 2");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("ep_density_profile: p must lie in [0, 1]");
  std::vector<DensityRow> rows;
  for (int N = 1; N <= N_max; ++N) {
    const ShellCensus c = shell_counts_closed_form(N);
    const double cells = std::pow(2.0 * N, 3);
    double total = 0.0;
    for (std::size_t i = 0; i < kMultiplicities.size(); ++i) {
      int ns = kMultiplicities[i];
      double shells = static_cast<double>(c.shells[i]);
      if (mode == CensusMode::AnisotropyFiltered && ns >= 12) {
        ns /= 3;
        shells *= 3.0;
      }
      const double z = zeta(ns, p);
      const double d = z * shells / cells;
      total += d;
      rows.push_back({N, N * lattice_constant, ns, shells, z, d});
    }
    rows.push_back({N, N * lattice_constant, 0, 0.0, 0.0, total});
  }
  return rows;
}

inline double total_density(int N, double p, CensusMode mode, double lattice_constant = 5.43) {
  const auto rows = ep_density_profile(std::max(N, 2), p, mode, lattice_constant);
  for (const auto &r : rows)
    if (r.N == N && r.ns == 0) return r.density;
  throw std::logic_error("total_density: row missing");
}

} // namespace frozencore
