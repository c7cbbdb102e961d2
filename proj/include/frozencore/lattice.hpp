#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "frozencore/rng.hpp"
#include "frozencore/types.hpp"

namespace frozencore {

// Diamond-cubic silicon: simple cubic cell of side a0 (4 integer units) with
// an 8-site basis. The donor sits at the origin.

enum class BasisClass { Class1, Class2, Class3 };

inline std::string to_string(BasisClass c) {
  switch (c) {
  case BasisClass::Class1: return "1";
  case BasisClass::Class2: return "2";
  case BasisClass::Class3: return "3";
  }
  return "?";
}

inline constexpr std::array<IntVec3, 8> kBasisVectors{{
    {0, 0, 0}, {0, 2, 2}, {2, 0, 2}, {2, 2, 0}, {3, 3, 3}, {3, 1, 1}, {1, 3, 1}, {1, 1, 3},
}};

namespace detail {
constexpr int mod4(std::int32_t v) { return ((v % 4) + 4) % 4; }
} // namespace detail

/// Basis class from the modulo-4 residue of n, or nullopt if n is not a site.
inline std::optional<BasisClass> basis_class_of(const IntVec3 &n) {
  const int rx = detail::mod4(n.x), ry = detail::mod4(n.y), rz = detail::mod4(n.z);
  if (rx == 0 && ry == 0 && rz == 0) return BasisClass::Class2;
  const bool all_even = rx % 2 == 0 && ry % 2 == 0 && rz % 2 == 0;
  if (all_even) {
    const int twos = (rx == 2) + (ry == 2) + (rz == 2);
    if (twos == 2) return BasisClass::Class1;
    return std::nullopt;
  }
  const bool all_odd = rx % 2 == 1 && ry % 2 == 1 && rz % 2 == 1;
  if (all_odd && (rx + ry + rz) % 4 == 1) return BasisClass::Class3;
  return std::nullopt;
}

inline bool is_lattice_site(const IntVec3 &n) { return basis_class_of(n).has_value(); }

struct LatticeSite {
  IntVec3 n;
  BasisClass basis_class = BasisClass::Class2;
  bool occupied = false;

  Vec3 position(double lattice_constant) const { return to_position(n, lattice_constant); }
};

/// Number of sites generate_sites(N) produces: (2N+1)^3 + 12N^2(2N+1) + 32N^3.
constexpr std::int64_t site_count(int N) {
  const std::int64_t n = N;
  return (2 * n + 1) * (2 * n + 1) * (2 * n + 1) + 12 * n * n * (2 * n + 1) + 32 * n * n * n;
}

/// Visit every site of the complete-shell lattice of half-width N cells.
/// Class 2 spans [-N,N]^3, Class 3 spans [-N,N-1]^3 per basis vector, and
/// Class 1 spans [-N,N] on its zero coordinate and [-N,N-1] on its two
/// "2" coordinates. The union is closed under every signed permutation that
/// maps lattice sites onto lattice sites.
template <class Visitor>
void for_each_site(int N, Visitor &&visit) {
  if (N < 1) throw std::invalid_argument("lattice extent N must be >= 1, got " + std::to_string(N));
  for (std::size_t b = 0; b < kBasisVectors.size(); ++b) {
    const IntVec3 &basis = kBasisVectors[b];
    const BasisClass cls = b == 0 ? BasisClass::Class2 : (b <= 3 ? BasisClass::Class1 : BasisClass::Class3);
    auto hi = [&](std::int32_t component) {
      if (cls == BasisClass::Class2) return N;
      if (cls == BasisClass::Class3) return N - 1;
      return component == 0 ? N : N - 1;
    };
    const int hx = hi(basis.x), hy = hi(basis.y), hz = hi(basis.z);
    for (int i = -N; i <= hx; ++i)
      for (int j = -N; j <= hy; ++j)
        for (int k = -N; k <= hz; ++k)
          visit(LatticeSite{{basis.x + 4 * i, basis.y + 4 * j, basis.z + 4 * k}, cls, false});
  }
}

inline std::vector<LatticeSite> generate_sites(int N) {
  std::vector<LatticeSite> sites;
  sites.reserve(static_cast<std::size_t>(site_count(std::max(N, 1))));
  for_each_site(N, [&](const LatticeSite &s) { sites.push_back(s); });
  return sites;
}

// ---------------------------------------------------------------------------
// Shells

/// Canonical shell key: sorted |n_i|, optionally refined by the squared
/// projection onto an integer field direction d, (d.n)^2, which is
/// proportional to (n_B.n)^2 and keeps the key exact.
struct ShellKey {
  std::array<std::int32_t, 3> magnitudes{0, 0, 0};
  std::int64_t projection2 = -1; // -1 when unfiltered

  auto operator<=>(const ShellKey &) const = default;
  bool is_donor() const { return magnitudes[2] == 0; }
};

inline std::array<std::int32_t, 3> sorted_magnitudes(const IntVec3 &n) {
  std::array<std::int32_t, 3> m{std::abs(n.x), std::abs(n.y), std::abs(n.z)};
  std::sort(m.begin(), m.end());
  return m;
}

inline ShellKey classify_shell(const IntVec3 &n, const std::optional<IntVec3> &anisotropy_filter = std::nullopt) {
  ShellKey key;
  key.magnitudes = sorted_magnitudes(n);
  if (anisotropy_filter) {
    const std::int64_t d = anisotropy_filter->dot(n);
    key.projection2 = d * d;
  }
  return key;
}

inline ShellKey classify_shell(const LatticeSite &site, const std::optional<IntVec3> &anisotropy_filter = std::nullopt) {
  return classify_shell(site.n, anisotropy_filter);
}

/// Distinct signed permutations of n that are lattice sites (n included when n is a site).
inline std::vector<IntVec3> orbit(const IntVec3 &n) {
  const std::array<std::int32_t, 3> c{n.x, n.y, n.z};
  std::array<int, 3> perm{0, 1, 2};
  std::vector<IntVec3> out;
  do {
    for (int signs = 0; signs < 8; ++signs) {
      IntVec3 v{(signs & 1 ? -1 : 1) * c[perm[0]], (signs & 2 ? -1 : 1) * c[perm[1]],
                (signs & 4 ? -1 : 1) * c[perm[2]]};
      if (is_lattice_site(v)) out.push_back(v);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Orbit members that additionally share (d.n)^2 with n.
inline std::vector<IntVec3> filtered_orbit(const IntVec3 &n, const IntVec3 &direction) {
  auto members = orbit(n);
  const std::int64_t target = direction.dot(n) * direction.dot(n);
  std::erase_if(members, [&](const IntVec3 &v) { return direction.dot(v) * direction.dot(v) != target; });
  return members;
}

inline int shell_multiplicity(const IntVec3 &n) { return static_cast<int>(orbit(n).size()); }

/// Case-table multiplicity for a site's shell, used to cross-check orbit().
inline int multiplicity_from_case_table(const IntVec3 &n) {
  const auto m = sorted_magnitudes(n);
  if (m[2] == 0) return 1;
  int distinct_arrangements;
  if (m[0] != m[1] && m[1] != m[2]) distinct_arrangements = 6;
  else if (m[0] == m[1] && m[1] == m[2]) distinct_arrangements = 1;
  else distinct_arrangements = 3;
  const int nonzero = (m[0] != 0) + (m[1] != 0) + (m[2] != 0);
  const int sign_patterns = 1 << nonzero;
  const bool odd = (m[0] % 2) == 1;
  return distinct_arrangements * (odd ? sign_patterns / 2 : sign_patterns);
}

struct ShellGroup {
  ShellKey canonical_key;
  int multiplicity = 0;
  double radius = 0.0; // Angstrom
  std::vector<std::size_t> members; // indices into the site list
};

/// Group sites by shell key (donor origin excluded). Groups are ordered by key.
inline std::vector<ShellGroup> build_shell_groups(const std::vector<LatticeSite> &sites, double lattice_constant,
                                                  const std::optional<IntVec3> &anisotropy_filter = std::nullopt) {
  std::map<ShellKey, ShellGroup> groups;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].n.is_zero()) continue;
    const ShellKey key = classify_shell(sites[i].n, anisotropy_filter);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) {
      it->second.canonical_key = key;
      it->second.multiplicity = anisotropy_filter
                                    ? static_cast<int>(filtered_orbit(sites[i].n, *anisotropy_filter).size())
                                    : shell_multiplicity(sites[i].n);
      it->second.radius = to_position(sites[i].n, lattice_constant).norm();
    }
    it->second.members.push_back(i);
  }
  std::vector<ShellGroup> out;
  out.reserve(groups.size());
  for (auto &[key, g] : groups) out.push_back(std::move(g));
  return out;
}

// ---------------------------------------------------------------------------
// Occupancy realizations

struct BathRealization {
  std::uint64_t seed = 0;
  double abundance = 0.0;
  int extent = 0; // half-width N in cubic cells
  std::vector<LatticeSite> occupied_sites;

  bool contains(const IntVec3 &n) const {
    return std::binary_search(occupied_sites.begin(), occupied_sites.end(), n,
                              [](const auto &a, const auto &b) { return key_of(a) < key_of(b); });
  }

  /// Mark n occupied (used to place the central qubit). n must be a lattice site.
  void force_occupied(const IntVec3 &n) {
    const auto cls = basis_class_of(n);
    if (!cls) throw std::invalid_argument("force_occupied: not a lattice site");
    auto it = std::lower_bound(occupied_sites.begin(), occupied_sites.end(), n,
                               [](const LatticeSite &a, const IntVec3 &b) { return a.n < b; });
    if (it != occupied_sites.end() && it->n == n) return;
    occupied_sites.insert(it, LatticeSite{n, *cls, true});
  }

private:
  static const IntVec3 &key_of(const LatticeSite &s) { return s.n; }
  static const IntVec3 &key_of(const IntVec3 &n) { return n; }
};

namespace detail {
inline void check_abundance(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("abundance p must lie in [0,1], got " + std::to_string(p));
}
inline void finish(BathRealization &r) {
  std::sort(r.occupied_sites.begin(), r.occupied_sites.end(),
            [](const LatticeSite &a, const LatticeSite &b) { return a.n < b.n; });
}
} // namespace detail

/// Independent Bernoulli(p) occupancy of every non-origin site of the
/// N-cell lattice. Occupancy of a site depends only on (seed, n).
inline BathRealization populate(int N, double p, std::uint64_t seed) {
  detail::check_abundance(p);
  BathRealization r{seed, p, N, {}};
  for_each_site(N, [&](LatticeSite s) {
    if (s.n.is_zero()) return;
    if (site_uniform(seed, s.n) < p) {
      s.occupied = true;
      r.occupied_sites.push_back(s);
    }
  });
  detail::finish(r);
  return r;
}

/// Same draws as populate(), restricted to r_min <= |r| <= r_max (Angstrom);
/// unoccupied sites are never materialized.
inline BathRealization populate_ball(double r_min, double r_max, double lattice_constant, double p,
                                     std::uint64_t seed) {
  detail::check_abundance(p);
  if (!(r_max > 0.0) || r_min > r_max) throw std::invalid_argument("populate_ball: need 0 <= r_min <= r_max, r_max > 0");
  const int N = std::max(1, static_cast<int>(std::ceil(r_max / lattice_constant)));
  const double s2 = (lattice_constant / 4.0) * (lattice_constant / 4.0);
  const double lo2 = r_min * r_min, hi2 = r_max * r_max;
  BathRealization r{seed, p, N, {}};
  for_each_site(N, [&](LatticeSite s) {
    if (s.n.is_zero()) return;
    const double d2 = s2 * static_cast<double>(s.n.norm2());
    if (d2 < lo2 || d2 > hi2) return;
    if (site_uniform(seed, s.n) < p) {
      s.occupied = true;
      r.occupied_sites.push_back(s);
    }
  });
  detail::finish(r);
  return r;
}

/// Occupied sites grouped by (optionally filtered) shell key.
class ShellIndex {
public:
  ShellIndex(const BathRealization &realization, std::optional<IntVec3> anisotropy_filter)
      : realization_(&realization), filter_(anisotropy_filter) {
    const auto &occ = realization.occupied_sites;
    for (std::size_t i = 0; i < occ.size(); ++i) {
      if (occ[i].n.is_zero()) continue;
      groups_[classify_shell(occ[i].n, filter_)].push_back(i);
    }
  }

  const std::optional<IntVec3> &filter() const { return filter_; }
  const std::map<ShellKey, std::vector<std::size_t>> &groups() const { return groups_; }

  /// Indices (into occupied_sites) sharing n's key, n itself excluded.
  std::vector<std::size_t> partners_of(const IntVec3 &n) const {
    std::vector<std::size_t> out;
    if (n.is_zero()) return out;
    auto it = groups_.find(classify_shell(n, filter_));
    if (it == groups_.end()) return out;
    for (std::size_t idx : it->second)
      if (realization_->occupied_sites[idx].n != n) out.push_back(idx);
    return out;
  }

private:
  const BathRealization *realization_;
  std::optional<IntVec3> filter_;
  std::map<ShellKey, std::vector<std::size_t>> groups_;
};

/// All other occupied sites that share the site's shell (and sub-shell) key.
inline std::vector<LatticeSite> equivalent_sites(const LatticeSite &site, const BathRealization &realization,
                                                 const std::optional<IntVec3> &anisotropy_filter = std::nullopt) {
  std::vector<LatticeSite> out;
  if (site.n.is_zero()) return out;
  const ShellKey key = classify_shell(site.n, anisotropy_filter);
  for (const auto &s : realization.occupied_sites)
    if (s.n != site.n && !s.n.is_zero() && classify_shell(s.n, anisotropy_filter) == key) out.push_back(s);
  return out;
}

} // namespace frozencore
