#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "frozencore/lattice.hpp"
#include "frozencore/types.hpp"

namespace frozencore {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double mu0_over_4pi = 1.0e-7;        // N A^-2
inline constexpr double mu0 = 4.0e-7 * std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double angstrom3_to_m3 = 1.0e-30;
inline constexpr double kl_reference_energy_ev = 0.029;
} // namespace constants

/// Donor and host parameters. Gyromagnetic ratios are magnitudes in
/// rad s^-1 T^-1; every coupling derived from them is returned in Hz.
struct DonorConfig {
  double lattice_constant = 5.43;       // a0, Angstrom
  double ionization_energy = 0.044;     // E_i, eV (phosphorus)
  double kl_a = 25.09;                  // Angstrom
  double kl_b = 14.43;                  // Angstrom
  double eta = 186.0;                   // charge density on a site
  double gamma_e = 1.76085963023e11;    // electron
  double gamma_n = 5.3190e7;            // 29Si, magnitude
  double b0 = 0.35;                     // Tesla (X-band)
  IntVec3 field_direction{1, 0, 0};
  double hyperfine_cutoff = 20.0;       // r0, Angstrom

  double kl_n() const { return std::sqrt(constants::kl_reference_energy_ev / ionization_energy); }
  double k0() const { return 0.85 * constants::two_pi / lattice_constant; }
  double electron_zeeman_hz() const { return gamma_e * b0 / constants::two_pi; }
  double nuclear_zeeman_hz() const { return gamma_n * b0 / constants::two_pi; }
  Vec3 field_unit() const { return to_vec3(field_direction).normalized(); }

  void validate() const {
    auto positive = [](double v, const char *name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    positive(lattice_constant, "lattice_constant");
    positive(ionization_energy, "ionization_energy");
    positive(kl_a, "kl_a");
    positive(kl_b, "kl_b");
    positive(eta, "eta");
    positive(gamma_e, "gamma_e");
    positive(gamma_n, "gamma_n");
    positive(b0, "b0");
    positive(hyperfine_cutoff, "hyperfine_cutoff");
    if (field_direction.is_zero()) throw std::invalid_argument("field_direction must be nonzero");
  }
};

namespace detail {

/// Kohn-Luttinger envelope along `axis` times its Bloch factor. The two
/// transverse coordinates enter only through the commutative sum o1^2+o2^2,
/// so permuting coordinates permutes the three terms exactly.
inline double kl_term(double axis, double o1, double o2, const DonorConfig &cfg) {
  const double na = cfg.kl_n() * cfg.kl_a;
  const double nb = cfg.kl_n() * cfg.kl_b;
  const double norm = std::sqrt(std::numbers::pi * na * na * nb);
  const double arg = std::sqrt(axis * axis / (nb * nb) + (o1 * o1 + o2 * o2) / (na * na));
  return std::exp(-arg) / norm * std::cos(cfg.k0() * std::fabs(axis));
}

/// P = (4/9) gamma_e gamma_n hbar eta mu0, converted so that P * F^2 with F
/// in Angstrom^-3/2 is in Hz.
inline double contact_prefactor_hz(const DonorConfig &cfg) {
  return 4.0 / 9.0 * cfg.gamma_e * cfg.gamma_n * constants::hbar * cfg.eta * constants::mu0 /
         constants::angstrom3_to_m3 / constants::two_pi;
}

} // namespace detail

/// Isotropic Fermi contact coupling J(r) in Hz, r in Angstrom. The result is
/// bitwise invariant under signed permutations of r.
inline double contact_J(const Vec3 &r, const DonorConfig &cfg) {
  const double x = std::fabs(r.x), y = std::fabs(r.y), z = std::fabs(r.z);
  std::array<double, 3> terms{detail::kl_term(x, y, z, cfg), detail::kl_term(y, z, x, cfg),
                              detail::kl_term(z, x, y, cfg)};
  std::sort(terms.begin(), terms.end());
  const double s = (terms[0] + terms[1]) + terms[2];
  return detail::contact_prefactor_hz(cfg) * s * s;
}

inline double contact_J(const IntVec3 &n, const DonorConfig &cfg) {
  return contact_J(to_position(n, cfg.lattice_constant), cfg);
}

/// Upper bound on contact_J over all |r| >= radius.
inline double contact_J_bound(double radius, const DonorConfig &cfg) {
  const double n = cfg.kl_n();
  const double na = n * cfg.kl_a, nb = n * cfg.kl_b;
  const double norm = std::sqrt(std::numbers::pi * na * na * nb);
  const double f = std::exp(-radius / std::max(na, nb)) / norm;
  return detail::contact_prefactor_hz(cfg) * 9.0 * f * f;
}

/// Secular dipolar coupling (mu0/4pi) g_i g_j hbar (1 - 3 cos^2 theta) / r^3 in
/// Hz; theta is the angle between the field and r_j - r_i.
inline double dipolar_C(const Vec3 &r_i, const Vec3 &r_j, double gamma_i, double gamma_j, const Vec3 &field_unit) {
  const Vec3 d = r_j - r_i;
  const double r2 = d.norm2();
  if (!(r2 > 0.0)) throw std::invalid_argument("dipolar_C: coincident sites");
  const double r = std::sqrt(r2);
  const double c = d.dot(field_unit) / r;
  return constants::mu0_over_4pi * gamma_i * gamma_j * constants::hbar * (1.0 - 3.0 * c * c) /
         (r2 * r * constants::angstrom3_to_m3) / constants::two_pi;
}

/// Nuclear-nuclear dipolar coupling between two 29Si nuclei.
inline double nuclear_dipolar(const Vec3 &r_i, const Vec3 &r_j, const DonorConfig &cfg) {
  return dipolar_C(r_i, r_j, cfg.gamma_n, cfg.gamma_n, cfg.field_unit());
}

/// Electron-nuclear dipolar term C_en for a nucleus at r from the donor.
inline double electron_nuclear_dipolar(const Vec3 &r, const DonorConfig &cfg) {
  return dipolar_C(Vec3{}, r, cfg.gamma_e, cfg.gamma_n, cfg.field_unit());
}

/// J(r) - C_en(r) Theta(r - r0). The dipolar tail is off at r == r0.
inline double secular_hyperfine(const Vec3 &r, const DonorConfig &cfg) {
  const double J = contact_J(r, cfg);
  if (r.norm() > cfg.hyperfine_cutoff) return J - electron_nuclear_dipolar(r, cfg);
  return J;
}

inline double secular_hyperfine(const IntVec3 &n, const DonorConfig &cfg) {
  return secular_hyperfine(to_position(n, cfg.lattice_constant), cfg);
}

/// Effective intrabath coupling C_dip + J1 J2 / omega0 (all Hz).
inline double mediated_C12(double J1, double J2, double omega0, double C_dip) {
  if (omega0 == 0.0) throw std::invalid_argument("mediated_C12: electron Zeeman frequency must be nonzero");
  return C_dip + J1 * J2 / omega0;
}

// ---------------------------------------------------------------------------
// Frozen core

enum class ShellStatistic { Mean, Max };

struct FrozenCoreOptions {
  double bin_width = 2.0; // Angstrom
  ShellStatistic statistic = ShellStatistic::Mean;
};

struct FrozenCoreResult {
  double radius = 0.0; // Angstrom
  bool below_on_site = false; // linewidth exceeds every coupling: radius 0
  std::string warning;
};

/// Smallest radius beyond which the per-shell statistic of |secular
/// hyperfine| stays below the linewidth. Shells are radial bins of width
/// bin_width about the donor.
inline FrozenCoreResult frozen_core_radius(double linewidth, const DonorConfig &cfg,
                                           const FrozenCoreOptions &opts = {}) {
  if (!(linewidth > 0.0)) throw std::invalid_argument("frozen_core_radius: linewidth must be positive");
  if (!(opts.bin_width > 0.0)) throw std::invalid_argument("frozen_core_radius: bin_width must be positive");
  cfg.validate();

  // Past r_scan every site is bounded below the linewidth.
  const double k_en = constants::mu0_over_4pi * cfg.gamma_e * cfg.gamma_n * constants::hbar /
                      constants::angstrom3_to_m3 / constants::two_pi;
  auto bound = [&](double r) { return contact_J_bound(r, cfg) + (r > 0 ? 2.0 * k_en / (r * r * r) : 1e300); };
  double r_scan = cfg.lattice_constant / 4.0;
  while (bound(r_scan) >= linewidth) r_scan += opts.bin_width;

  const int N = std::max(1, static_cast<int>(std::ceil(r_scan / cfg.lattice_constant)));
  const std::size_t bins = static_cast<std::size_t>(std::ceil(r_scan / opts.bin_width)) + 1;
  std::vector<double> sum(bins, 0.0), peak(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  for_each_site(N, [&](const LatticeSite &s) {
    if (s.n.is_zero()) return;
    const Vec3 r = s.position(cfg.lattice_constant);
    const double d = r.norm();
    if (d > r_scan) return;
    const std::size_t b = static_cast<std::size_t>(d / opts.bin_width);
    const double v = std::fabs(secular_hyperfine(r, cfg));
    sum[b] += v;
    peak[b] = std::max(peak[b], v);
    ++count[b];
  });

  FrozenCoreResult out;
  for (std::size_t b = bins; b-- > 0;) {
    if (count[b] == 0) continue;
    const double stat = opts.statistic == ShellStatistic::Mean ? sum[b] / static_cast<double>(count[b]) : peak[b];
    if (stat >= linewidth) {
      out.radius = static_cast<double>(b + 1) * opts.bin_width;
      return out;
    }
  }
  out.below_on_site = true;
  out.warning = "linewidth exceeds every hyperfine coupling; frozen core radius is 0";
  return out;
}

} // namespace frozencore
