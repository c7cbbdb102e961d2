#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "frozencore/couplings.hpp"
#include "frozencore/lattice.hpp"
#include "frozencore/parallel.hpp"
#include "frozencore/pseudospin.hpp"
#include "frozencore/rng.hpp"

namespace frozencore {

// ---------------------------------------------------------------------------
// Far bath

/// Mixing depth sin^2(theta+ - theta-) of a pair for a nuclear qubit.
inline double contribution_weight(const PairCluster &c) {
  const auto p = make_params(c, QubitKind::Nuclear);
  const double s = std::sin(p.theta_plus - p.theta_minus);
  return s * s;
}

struct FarBathSpec {
  double r_min = 50.0;          // Angstrom from the donor
  double r_max = 350.0;
  double pair_sep_max = 45.0;   // Angstrom between the two members
  double c12_min = 0.01;        // Hz, window on |C12|
  double c12_max = 1.0;
  double sample_fraction = 0.02; // (0, 1], applied to weak pairs
  double stratum_width = 10.0;  // Angstrom, radial strata of the pair midpoint
  double depth_full = 1e-7;     // pairs with contribution_weight >= depth_full are all kept
  std::uint64_t sample_salt = 0x243f6a8885a308d3ULL;

  void validate() const {
    if (!(r_min >= 0.0 && r_min < r_max)) throw std::invalid_argument("far bath: need 0 <= r_min < r_max");
    if (!(c12_min < c12_max) || c12_min < 0.0) throw std::invalid_argument("far bath: need 0 <= c12_min < c12_max");
    if (!(pair_sep_max > 0.0)) throw std::invalid_argument("far bath: pair_sep_max must be positive");
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0))
      throw std::invalid_argument("far bath: sample_fraction must lie in (0, 1]");
    if (!(stratum_width > 0.0)) throw std::invalid_argument("far bath: stratum_width must be positive");
    if (!(depth_full >= 0.0)) throw std::invalid_argument("far bath: depth_full must be >= 0");
  }
};

struct Stratum {
  double r_lo = 0.0;
  bool strong = false; // contribution_weight >= depth_full, kept in full
  std::uint64_t total = 0;
  std::uint64_t sampled = 0;
  double weight = 1.0;
};

struct FarBath {
  std::vector<PairCluster> clusters; // sampled pairs, weights set per stratum
  std::vector<Stratum> strata;
  std::uint64_t total_pairs = 0;
  std::uint64_t sampled_pairs = 0;
  std::uint64_t unrepresented_pairs = 0; // pairs in strata with no sampled member
};

namespace detail {

struct BathSpin {
  IntVec3 n;
  Vec3 r;
  double j_secular;
  double j_contact;
  double c_qubit;
  ShellKey key;
};

} // namespace detail

/// Occupied pairs with both members in [r_min, r_max], separation at most
/// pair_sep_max, |C12| inside the window and distinct shell keys. With
/// sample_fraction < 1, strata are (midpoint radius, strong or weak) cells.
/// Strong pairs (contribution_weight >= depth_full) are all kept; weak pairs
/// are subsampled deterministically and carry weight total/sampled for their
/// stratum.
inline FarBath build_far_bath(const BathRealization &realization, const IntVec3 &qubit_site, const FarBathSpec &spec,
                              const DonorConfig &cfg, unsigned threads = 1) {
  spec.validate();
  cfg.validate();
  const Vec3 qubit = to_position(qubit_site, cfg.lattice_constant);
  const Vec3 field = cfg.field_unit();
  const double omega0 = cfg.electron_zeeman_hz();

  std::vector<detail::BathSpin> spins;
  for (const auto &s : realization.occupied_sites) {
    if (s.n == qubit_site || s.n.is_zero()) continue;
    const Vec3 r = s.position(cfg.lattice_constant);
    const double d = r.norm();
    if (d < spec.r_min || d > spec.r_max) continue;
    spins.push_back({s.n, r, secular_hyperfine(r, cfg), contact_J(r, cfg),
                     dipolar_C(qubit, r, cfg.gamma_n, cfg.gamma_n, field), classify_shell(s.n)});
  }

  // Uniform grid, cell edge pair_sep_max / 2.
  const double h = spec.pair_sep_max / 2.0;
  const int reach = 2;
  const int dim = static_cast<int>(std::ceil(2.0 * spec.r_max / h)) + 1;
  auto cell_coord = [&](double v) { return std::clamp(static_cast<int>(std::floor((v + spec.r_max) / h)), 0, dim - 1); };
  auto cell_index = [&](int cx, int cy, int cz) {
    return (static_cast<std::size_t>(cx) * dim + cy) * dim + cz;
  };
  const std::size_t n_cells = static_cast<std::size_t>(dim) * dim * dim;
  std::vector<std::size_t> cell_of(spins.size());
  std::vector<std::size_t> start(n_cells + 1, 0);
  for (std::size_t i = 0; i < spins.size(); ++i) {
    cell_of[i] = cell_index(cell_coord(spins[i].r.x), cell_coord(spins[i].r.y), cell_coord(spins[i].r.z));
    ++start[cell_of[i] + 1];
  }
  for (std::size_t c = 0; c < n_cells; ++c) start[c + 1] += start[c];
  std::vector<std::size_t> order(spins.size());
  {
    auto fill = start;
    for (std::size_t i = 0; i < spins.size(); ++i) order[fill[cell_of[i]]++] = i;
  }

  // Forward half of the neighbor stencil; the zero offset is handled with j > i.
  std::vector<std::array<int, 3>> forward;
  for (int dx = -reach; dx <= reach; ++dx)
    for (int dy = -reach; dy <= reach; ++dy)
      for (int dz = -reach; dz <= reach; ++dz)
        if (std::make_tuple(dx, dy, dz) > std::make_tuple(0, 0, 0)) forward.push_back({dx, dy, dz});

  const std::size_t n_radial =
      static_cast<std::size_t>(std::ceil((spec.r_max - spec.r_min) / spec.stratum_width)) + 1;
  const std::size_t n_strata = 2 * n_radial;
  const bool subsample = spec.sample_fraction < 1.0;
  const double sep2 = spec.pair_sep_max * spec.pair_sep_max;

  struct ChunkResult {
    std::vector<PairCluster> kept;
    std::vector<std::size_t> kept_stratum;
    std::vector<std::uint64_t> totals;
  };
  const std::size_t n_chunks = static_cast<std::size_t>(dim); // one x-slab per chunk
  std::vector<ChunkResult> results(n_chunks);

  parallel_for_chunks(n_chunks, threads, [&](std::size_t chunk) {
    ChunkResult &res = results[chunk];
    res.totals.assign(n_strata, 0);
    auto consider = [&](std::size_t a, std::size_t b) {
      const auto &sa = spins[a];
      const auto &sb = spins[b];
      const Vec3 d = sb.r - sa.r;
      const double r2 = d.norm2();
      if (r2 > sep2) return;
      if (sa.key == sb.key) return; // equivalent pairs belong to the other model
      const double c12 = mediated_C12(sa.j_contact, sb.j_contact, omega0, dipolar_C(sa.r, sb.r, cfg.gamma_n, cfg.gamma_n, field));
      const double ac = std::fabs(c12);
      if (ac < spec.c12_min || ac > spec.c12_max) return;
      const double mid = ((sa.r + sb.r) * 0.5).norm();
      const std::size_t rb = std::min(n_radial - 1, static_cast<std::size_t>(std::max(0.0, mid - spec.r_min) / spec.stratum_width));
      const bool a_first = sa.n < sb.n;
      const auto &s1 = a_first ? sa : sb;
      const auto &s2 = a_first ? sb : sa;
      const PairCluster cluster{s1.n, s2.n, s1.j_secular, s2.j_secular, s1.c_qubit, s2.c_qubit, c12,
                                ClusterKind::FarBath, 1.0};
      const bool strong = contribution_weight(cluster) >= spec.depth_full;
      const std::size_t st = 2 * rb + (strong ? 1 : 0);
      ++res.totals[st];
      if (subsample && !strong && pair_uniform(realization.seed ^ spec.sample_salt, s1.n, s2.n) >= spec.sample_fraction)
        return;
      res.kept.push_back(cluster);
      res.kept_stratum.push_back(st);
    };
    const int cx = static_cast<int>(chunk);
    for (int cy = 0; cy < dim; ++cy) {
      for (int cz = 0; cz < dim; ++cz) {
        const std::size_t c = cell_index(cx, cy, cz);
        for (std::size_t ia = start[c]; ia < start[c + 1]; ++ia) {
          for (std::size_t ib = ia + 1; ib < start[c + 1]; ++ib) consider(order[ia], order[ib]);
          for (const auto &o : forward) {
            const int nx = cx + o[0], ny = cy + o[1], nz = cz + o[2];
            if (nx < 0 || ny < 0 || nz < 0 || nx >= dim || ny >= dim || nz >= dim) continue;
            const std::size_t nc = cell_index(nx, ny, nz);
            for (std::size_t ib = start[nc]; ib < start[nc + 1]; ++ib) consider(order[ia], order[ib]);
          }
        }
      }
    }
  });

  FarBath bath;
  bath.strata.resize(n_strata);
  for (std::size_t s = 0; s < n_strata; ++s) {
    bath.strata[s].r_lo = spec.r_min + spec.stratum_width * static_cast<double>(s / 2);
    bath.strata[s].strong = s % 2 == 1;
  }
  std::vector<std::size_t> stratum_of;
  for (auto &res : results) {
    for (std::size_t s = 0; s < n_strata; ++s) bath.strata[s].total += res.totals[s];
    for (std::size_t k = 0; k < res.kept.size(); ++k) {
      bath.clusters.push_back(res.kept[k]);
      stratum_of.push_back(res.kept_stratum[k]);
      ++bath.strata[res.kept_stratum[k]].sampled;
    }
  }
  for (auto &s : bath.strata) {
    bath.total_pairs += s.total;
    bath.sampled_pairs += s.sampled;
    if (s.sampled > 0) s.weight = static_cast<double>(s.total) / static_cast<double>(s.sampled);
    else bath.unrepresented_pairs += s.total;
  }
  for (std::size_t k = 0; k < bath.clusters.size(); ++k) bath.clusters[k].weight = bath.strata[stratum_of[k]].weight;

  std::sort(bath.clusters.begin(), bath.clusters.end(), [](const PairCluster &a, const PairCluster &b) {
    return std::tie(a.site1, a.site2) < std::tie(b.site1, b.site2);
  });
  return bath;
}

// ---------------------------------------------------------------------------
// Equivalent pairs

enum class AnisotropyMode { IsotropicOnly, AnisotropyFiltered };

inline std::string to_string(AnisotropyMode m) {
  return m == AnisotropyMode::IsotropicOnly ? "isotropic" : "filtered";
}

struct EPBathSpec {
  AnisotropyMode anisotropy = AnisotropyMode::IsotropicOnly;
  int proximity_cells = 3; // m
  std::size_t max_pairs = 500;

  void validate() const {
    if (proximity_cells < 1) throw std::invalid_argument("EP bath: proximity_cells must be >= 1");
  }
};

inline std::optional<IntVec3> shell_filter(AnisotropyMode mode, const DonorConfig &cfg) {
  if (mode == AnisotropyMode::AnisotropyFiltered) return cfg.field_direction;
  return std::nullopt;
}


/// Lattice extent that holds the complete shells of every site within the
/// qubit's proximity cube.
inline int ep_lattice_extent(const IntVec3 &qubit_site, const EPBathSpec &spec, const DonorConfig &cfg) {
  const double reach = to_position(qubit_site, cfg.lattice_constant).norm() +
                       std::sqrt(3.0) * spec.proximity_cells * cfg.lattice_constant;
  return static_cast<int>(std::ceil(reach / cfg.lattice_constant)) + 1;
}

/// Symmetry-matched pairs (i, j) with i inside the cube of half-width
/// m * a0 around the qubit and j anywhere on i's (sub-)shell. Pairs are ranked
/// by sin^2(theta+ - theta-), then by how close the flip-flop rate is to
/// 1 s^-1, then by sites; the first max_pairs are returned in rank order.
inline std::vector<PairCluster> build_ep_bath(const BathRealization &realization, const IntVec3 &qubit_site,
                                              const EPBathSpec &spec, const DonorConfig &cfg) {
  spec.validate();
  cfg.validate();
  const auto filter = shell_filter(spec.anisotropy, cfg);
  const ShellIndex index(realization, filter);
  const auto &occ = realization.occupied_sites;
  const double a0 = cfg.lattice_constant;
  const Vec3 qubit = to_position(qubit_site, a0);
  const Vec3 field = cfg.field_unit();
  const double limit = spec.proximity_cells * a0;

  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (occ[i].n == qubit_site || occ[i].n.is_zero()) continue;
    if ((occ[i].position(a0) - qubit).max_abs() > limit) continue;
    for (std::size_t j : index.partners_of(occ[i].n)) {
      if (occ[j].n == qubit_site) continue;
      pairs.emplace(std::min(i, j), std::max(i, j));
    }
  }

  struct Ranked {
    PairCluster cluster;
    double weight;
    double rate_mismatch;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(pairs.size());
  const double omega0 = cfg.electron_zeeman_hz();
  for (const auto &[i, j] : pairs) {
    const Vec3 ri = occ[i].position(a0), rj = occ[j].position(a0);
    PairCluster c;
    c.site1 = occ[i].n;
    c.site2 = occ[j].n;
    c.j1 = contact_J(ri, cfg);
    c.j2 = contact_J(rj, cfg);
    if (!filter && c.j1 != c.j2) throw std::logic_error("equivalent pair with unequal contact couplings");
    c.c12 = mediated_C12(c.j1, c.j2, omega0, dipolar_C(ri, rj, cfg.gamma_n, cfg.gamma_n, field));
    c.c1a = dipolar_C(qubit, ri, cfg.gamma_n, cfg.gamma_n, field);
    c.c2a = dipolar_C(qubit, rj, cfg.gamma_n, cfg.gamma_n, field);
    c.kind = ClusterKind::EquivalentPair;
    const auto p = make_params(c, QubitKind::Nuclear);
    const double omega = 2.0 * std::numbers::pi * 0.5 * (p.omega_plus + p.omega_minus);
    const double mismatch = omega > 0.0 ? std::fabs(std::log(omega)) : std::numeric_limits<double>::infinity();
    ranked.push_back({c, contribution_weight(c), mismatch});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked &a, const Ranked &b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.rate_mismatch != b.rate_mismatch) return a.rate_mismatch < b.rate_mismatch;
    return std::tie(a.cluster.site1, a.cluster.site2) < std::tie(b.cluster.site1, b.cluster.site2);
  });
  if (ranked.size() > spec.max_pairs) ranked.resize(spec.max_pairs);
  std::vector<PairCluster> out;
  out.reserve(ranked.size());
  for (auto &r : ranked) out.push_back(r.cluster);
  return out;
}

/// An occupied site sharing the qubit's (sub-)shell key, nearest first.
inline std::optional<LatticeSite> detect_direct_partner(const BathRealization &realization, const IntVec3 &qubit_site,
                                                        const EPBathSpec &spec, const DonorConfig &cfg) {
  if (qubit_site.is_zero()) return std::nullopt;
  const auto filter = shell_filter(spec.anisotropy, cfg);
  const ShellKey key = classify_shell(qubit_site, filter);
  std::optional<LatticeSite> best;
  for (const auto &s : realization.occupied_sites) {
    if (s.n == qubit_site || s.n.is_zero()) continue;
    if (classify_shell(s.n, filter) != key) continue;
    if (!best || std::make_pair(s.n.norm2(), s.n) < std::make_pair(best->n.norm2(), best->n)) best = s;
  }
  return best;
}

} // namespace frozencore
