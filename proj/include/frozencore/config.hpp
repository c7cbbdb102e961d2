#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "frozencore/couplings.hpp"
#include "frozencore/experiment.hpp"

namespace frozencore {

// Plain "key = value" text with optional [section] headers. Keys are unique
// across sections; '#' and ';' start comments.

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Config {
  DonorConfig donor;
  RunSpec run;
  std::optional<QubitPlacement> placement; // unset: donor site for far_bath, target J otherwise
  int census_extent = 20;                  // N_max for census tables
  double frozen_core_linewidth = 127.0;    // Hz
  SweepAxis sweep_axis = SweepAxis::BathRadius;
  std::vector<double> sweep_values{250.0, 300.0, 350.0, 400.0, 450.0};
  std::vector<double> trend_j_values{0.1e6, 0.3e6, 0.5e6, 0.7e6, 1.0e6, 3.8e6};
  std::string output_directory = "out";
  int precision = 12;
  std::set<std::string> explicit_keys;

  /// RunSpec with the placement rule applied.
  RunSpec run_spec() const {
    RunSpec r = run;
    r.placement = placement.value_or(r.model == BathModel::FarBath ? QubitPlacement::DonorSite : QubitPlacement::TargetJ);
    return r;
  }
};

namespace detail {

inline std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string join_doubles(const std::vector<double> &v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

inline double parse_double(const std::string &key, const std::string &text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty())
    throw ConfigError(key + ": expected a number, got '" + t + "'");
  if (std::isnan(v)) throw ConfigError(key + ": NaN is not allowed");
  return v;
}

inline long long parse_int(const std::string &key, const std::string &text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty())
    throw ConfigError(key + ": expected an integer, got '" + t + "'");
  return v;
}

inline bool parse_bool(const std::string &key, const std::string &text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + t + "'");
}

inline std::vector<double> parse_list(const std::string &key, const std::string &text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list");
  return out;
}

inline void require(bool ok, const std::string &key, const std::string &what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

} // namespace detail

/// Where a default value comes from.
struct FieldDef {
  std::string key;
  std::string section;
  std::string provenance;
  std::function<std::string(const Config &)> get;
  std::function<void(Config &, const std::string &)> set;
};

inline const std::vector<FieldDef> &config_fields() {
  using namespace detail;
  auto positive = [](const std::string &k, double v) { require(v > 0.0 && std::isfinite(v), k, "must be positive"); };
  auto dbl = [positive](std::string key, std::string section, std::string prov, double DonorConfig::*m) {
    return FieldDef{key, section, prov, [m](const Config &c) { return format_double(c.donor.*m); },
                    [key, m, positive](Config &c, const std::string &v) {
                      const double x = parse_double(key, v);
                      positive(key, x);
                      c.donor.*m = x;
                    }};
  };
  static const std::vector<FieldDef> fields = [&] {
    std::vector<FieldDef> f;
    f.push_back(dbl("lattice_constant", "donor", "literature (silicon, room temperature)", &DonorConfig::lattice_constant));
    f.push_back(dbl("ionization_energy", "donor", "literature (phosphorus donor, 44 meV)", &DonorConfig::ionization_energy));
    f.push_back(dbl("kl_a", "donor", "literature (Kohn-Luttinger envelope, de Sousa and Das Sarma 2003)", &DonorConfig::kl_a));
    f.push_back(dbl("kl_b", "donor", "literature (Kohn-Luttinger envelope, de Sousa and Das Sarma 2003)", &DonorConfig::kl_b));
    f.push_back(dbl("eta", "donor", "literature (on-site charge density, de Sousa and Das Sarma 2003)", &DonorConfig::eta));
    f.push_back(dbl("gamma_e", "donor", "codata (free electron)", &DonorConfig::gamma_e));
    f.push_back(dbl("gamma_n", "donor", "literature (29Si magnitude)", &DonorConfig::gamma_n));
    f.push_back(dbl("b0", "donor", "assumed (X-band field)", &DonorConfig::b0));
    f.push_back({"field_direction", "donor", "reference setup (field along [100])",
                 [](const Config &c) {
                   const auto &d = c.donor.field_direction;
                   return std::to_string(d.x) + ", " + std::to_string(d.y) + ", " + std::to_string(d.z);
                 },
                 [](Config &c, const std::string &v) {
                   std::stringstream ss(v);
                   std::string item;
                   std::vector<long long> xs;
                   while (std::getline(ss, item, ',')) xs.push_back(parse_int("field_direction", item));
                   require(xs.size() == 3, "field_direction", "expected three integers");
                   IntVec3 d{static_cast<std::int32_t>(xs[0]), static_cast<std::int32_t>(xs[1]),
                             static_cast<std::int32_t>(xs[2])};
                   require(!d.is_zero(), "field_direction", "must be nonzero");
                   c.donor.field_direction = d;
                 }});
    f.push_back(dbl("hyperfine_cutoff", "donor", "reference setup (dipolar tail beyond 20 Angstrom)", &DonorConfig::hyperfine_cutoff));

    f.push_back({"p", "lattice", "literature (natural 29Si abundance)",
                 [](const Config &c) { return format_double(c.run.abundance); },
                 [](Config &c, const std::string &v) {
                   const double x = parse_double("p", v);
                   require(x >= 0.0 && x <= 1.0, "p", "must lie in [0, 1]");
                   c.run.abundance = x;
                 }});
    f.push_back({"seed", "lattice", "chosen (first realization seed)",
                 [](const Config &c) { return std::to_string(c.run.seed); },
                 [](Config &c, const std::string &v) {
                   const long long x = parse_int("seed", v);
                   require(x >= 0, "seed", "must be >= 0");
                   c.run.seed = static_cast<std::uint64_t>(x);
                 }});
    f.push_back({"n_realizations", "lattice", "reference setup (100 spatial realizations)",
                 [](const Config &c) { return std::to_string(c.run.n_realizations); },
                 [](Config &c, const std::string &v) {
                   const long long x = parse_int("n_realizations", v);
                   require(x >= 1 && x <= 1000000, "n_realizations", "must lie in [1, 1000000]");
                   c.run.n_realizations = static_cast<int>(x);
                 }});
    f.push_back({"N", "lattice", "chosen (census table extent)",
                 [](const Config &c) { return std::to_string(c.census_extent); },
                 [](Config &c, const std::string &v) {
                   const long long x = parse_int("N", v);
                   require(x >= 2 && x <= 100000, "N", "must lie in [2, 100000]");
                   c.census_extent = static_cast<int>(x);
                 }});

    f.push_back({"model", "model", "chosen",
                 [](const Config &c) { return to_string(c.run.model); },
                 [](Config &c, const std::string &v) {
                   try {
                     c.run.model = parse_bath_model(trim(v));
                   } catch (const std::invalid_argument &e) {
                     throw ConfigError(std::string("model: ") + e.what());
                   }
                 }});
    f.push_back({"placement", "model", "chosen (donor site for far_bath, else target_j)",
                 [](const Config &c) { return c.placement ? to_string(*c.placement) : std::string("auto"); },
                 [](Config &c, const std::string &v) {
                   const std::string t = trim(v);
                   if (t == "auto") c.placement.reset();
                   else if (t == "donor_site") c.placement = QubitPlacement::DonorSite;
                   else if (t == "target_j") c.placement = QubitPlacement::TargetJ;
                   else throw ConfigError("placement: expected auto, donor_site or target_j, got '" + t + "'");
                 }});
    f.push_back({"qubit_target_j", "model", "reference setup (3.8 MHz proximate spin)",
                 [](const Config &c) { return format_double(c.run.qubit_target_j); },
                 [](Config &c, const std::string &v) {
                   const double x = parse_double("qubit_target_j", v);
                   require(x >= 0.0, "qubit_target_j", "must be >= 0");
                   c.run.qubit_target_j = x;
                 }});
    auto run_dbl = [](std::string key, std::string prov, double RunSpec::*m, double lo, double hi) {
      return FieldDef{key, "model", prov, [m](const Config &c) { return format_double(c.run.*m); },
                      [key, m, lo, hi](Config &c, const std::string &v) {
                        const double x = parse_double(key, v);
                        require(x > lo && x <= hi, key,
                                "must lie in (" + format_double(lo) + ", " + format_double(hi) + "]");
                        c.run.*m = x;
                      }};
    };
    f.push_back(run_dbl("tau_min", "numerical (grid start)", &RunSpec::tau_min, 0.0, 1e6));
    f.push_back(run_dbl("tau_max", "numerical (grid end)", &RunSpec::tau_max, 0.0, 1e6));
    f.push_back({"tau_points", "model", "numerical (200 log-spaced points)",
                 [](const Config &c) { return std::to_string(c.run.tau_points); },
                 [](Config &c, const std::string &v) {
                   const long long x = parse_int("tau_points", v);
                   require(x >= 2 && x <= 1000000, "tau_points", "must lie in [2, 1000000]");
                   c.run.tau_points = static_cast<int>(x);
                 }});
    f.push_back({"t2_method", "model", "chosen (1/e crossing)",
                 [](const Config &c) { return to_string(c.run.t2_method); },
                 [](Config &c, const std::string &v) {
                   const std::string t = trim(v);
                   if (t == "one_over_e") c.run.t2_method = T2Method::OneOverE;
                   else if (t == "stretched_exp") c.run.t2_method = T2Method::StretchedExpFit;
                   else throw ConfigError("t2_method: expected one_over_e or stretched_exp, got '" + t + "'");
                 }});
    f.push_back({"exclude_direct_partner", "model", "chosen",
                 [](const Config &c) { return std::string(c.run.exclude_direct_partner ? "true" : "false"); },
                 [](Config &c, const std::string &v) { c.run.exclude_direct_partner = parse_bool("exclude_direct_partner", v); }});
    f.push_back({"envelope", "model", "chosen (flip-flop manifold)",
                 [](const Config &c) { return std::string(c.run.envelope == EnvelopeMode::FlipFlop ? "flipflop" : "thermal"); },
                 [](Config &c, const std::string &v) {
                   const std::string t = trim(v);
                   if (t == "flipflop") c.run.envelope = EnvelopeMode::FlipFlop;
                   else if (t == "thermal") c.run.envelope = EnvelopeMode::Thermal;
                   else throw ConfigError("envelope: expected flipflop or thermal, got '" + t + "'");
                 }});
    auto far_dbl = [](std::string key, std::string prov, double FarBathSpec::*m, double lo, double hi, bool lo_open) {
      return FieldDef{key, "model", prov, [m](const Config &c) { return format_double(c.run.far.*m); },
                      [key, m, lo, hi, lo_open](Config &c, const std::string &v) {
                        const double x = parse_double(key, v);
                        require((lo_open ? x > lo : x >= lo) && x <= hi, key,
                                std::string("must lie in ") + (lo_open ? "(" : "[") + format_double(lo) + ", " +
                                    format_double(hi) + "]");
                        c.run.far.*m = x;
                      }};
    };
    f.push_back(far_dbl("far_r_min", "reference setup (50 Angstrom)", &FarBathSpec::r_min, 0.0, 1e5, false));
    f.push_back(far_dbl("far_r_max", "reference setup (350 Angstrom)", &FarBathSpec::r_max, 0.0, 1e5, true));
    f.push_back(far_dbl("far_pair_sep_max", "assumed (pair search radius)", &FarBathSpec::pair_sep_max, 0.0, 1e4, true));
    f.push_back(far_dbl("far_c12_min", "reference setup (0.01 Hz)", &FarBathSpec::c12_min, 0.0, 1e12, false));
    f.push_back(far_dbl("far_c12_max", "reference setup (1 Hz)", &FarBathSpec::c12_max, 0.0, 1e12, true));
    f.push_back(far_dbl("far_sample_fraction", "numerical (stratified subsample)", &FarBathSpec::sample_fraction, 0.0, 1.0, true));
    f.push_back(far_dbl("far_stratum_width", "numerical (10 Angstrom radial strata)", &FarBathSpec::stratum_width, 0.0, 1e5, true));
    f.push_back(far_dbl("far_depth_full", "numerical (mixing depth kept in full; above 1 disables)", &FarBathSpec::depth_full, 0.0, 2.0, false));
    f.push_back({"ep_anisotropy", "model", "chosen",
                 [](const Config &c) { return to_string(c.run.ep.anisotropy); },
                 [](Config &c, const std::string &v) {
                   const std::string t = trim(v);
                   if (t == "isotropic") c.run.ep.anisotropy = AnisotropyMode::IsotropicOnly;
                   else if (t == "filtered") c.run.ep.anisotropy = AnisotropyMode::AnisotropyFiltered;
                   else throw ConfigError("ep_anisotropy: expected isotropic or filtered, got '" + t + "'");
                 }});
    f.push_back({"ep_proximity_cells", "model", "reference setup (m = 3 cells)",
                 [](const Config &c) { return std::to_string(c.run.ep.proximity_cells); },
                 [](Config &c, const std::string &v) {
                   const long long x = parse_int("ep_proximity_cells", v);
                   require(x >= 1 && x <= 100, "ep_proximity_cells", "must lie in [1, 100]");
                   c.run.ep.proximity_cells = static_cast<int>(x);
                 }});
    f.push_back({"ep_max_pairs", "model", "reference setup (500 strongest pairs)",
                 [](const Config &c) { return std::to_string(c.run.ep.max_pairs); },
                 [](Config &c, const std::string &v) {
                   const long long x = parse_int("ep_max_pairs", v);
                   require(x >= 1, "ep_max_pairs", "must be >= 1");
                   c.run.ep.max_pairs = static_cast<std::size_t>(x);
                 }});
    f.push_back({"frozen_core_linewidth", "model", "reference setup (127 Hz)",
                 [](const Config &c) { return format_double(c.frozen_core_linewidth); },
                 [](Config &c, const std::string &v) {
                   const double x = parse_double("frozen_core_linewidth", v);
                   require(x > 0.0 && std::isfinite(x), "frozen_core_linewidth", "must be positive");
                   c.frozen_core_linewidth = x;
                 }});
    f.push_back({"sweep_axis", "model", "chosen",
                 [](const Config &c) { return to_string(c.sweep_axis); },
                 [](Config &c, const std::string &v) {
                   const std::string t = trim(v);
                   if (t == "r_max") c.sweep_axis = SweepAxis::BathRadius;
                   else if (t == "c12_min") c.sweep_axis = SweepAxis::C12Window;
                   else throw ConfigError("sweep_axis: expected r_max or c12_min, got '" + t + "'");
                 }});
    f.push_back({"sweep_values", "model", "chosen",
                 [](const Config &c) { return join_doubles(c.sweep_values); },
                 [](Config &c, const std::string &v) {
                   auto xs = parse_list("sweep_values", v);
                   for (double x : xs) require(x > 0.0 && std::isfinite(x), "sweep_values", "entries must be positive");
                   c.sweep_values = xs;
                 }});
    f.push_back({"trend_j_values", "model", "reference setup (0.1 to 3.8 MHz)",
                 [](const Config &c) { return join_doubles(c.trend_j_values); },
                 [](Config &c, const std::string &v) {
                   auto xs = parse_list("trend_j_values", v);
                   for (double x : xs) require(x > 0.0, "trend_j_values", "entries must be positive");
                   c.trend_j_values = xs;
                 }});

    f.push_back({"directory", "output", "chosen",
                 [](const Config &c) { return c.output_directory; },
                 [](Config &c, const std::string &v) {
                   const std::string t = trim(v);
                   require(!t.empty(), "directory", "must not be empty");
                   c.output_directory = t;
                 }});
    f.push_back({"precision", "output", "chosen (12 significant digits)",
                 [](const Config &c) { return std::to_string(c.precision); },
                 [](Config &c, const std::string &v) {
                   const long long x = parse_int("precision", v);
                   require(x >= 1 && x <= 17, "precision", "must lie in [1, 17]");
                   c.precision = static_cast<int>(x);
                 }});
    return f;
  }();
  return fields;
}

inline const FieldDef *find_field(const std::string &key) {
  for (const auto &f : config_fields())
    if (f.key == key) return &f;
  return nullptr;
}

inline void validate_config(const Config &c) {
  try {
    c.donor.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
  detail::require(c.run.tau_max > c.run.tau_min, "tau_max", "must exceed tau_min");
  detail::require(c.run.far.r_max > c.run.far.r_min, "far_r_max", "must exceed far_r_min");
  detail::require(c.run.far.c12_max > c.run.far.c12_min, "far_c12_max", "must exceed far_c12_min");
  const RunSpec r = c.run_spec();
  if (r.model != BathModel::FarBath && r.placement == QubitPlacement::DonorSite)
    throw ConfigError("placement: donor_site requires model = far_bath");
}

inline Config parse_config_text(const std::string &text, const std::string &origin = "<config>") {
  Config cfg;
  std::string section;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto where = [&] { return origin + ":" + std::to_string(line_no) + ": "; };
    std::string line = raw;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where() + "malformed section header '" + line + "'");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "donor" && section != "lattice" && section != "model" && section != "output")
        throw ConfigError(where() + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where() + "expected 'key = value', got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where() + "missing key");
    const FieldDef *f = find_field(key);
    if (!f) throw ConfigError(where() + "unknown key '" + key + "'");
    if (!section.empty() && f->section != section)
      throw ConfigError(where() + "key '" + key + "' belongs in [" + f->section + "], not [" + section + "]");
    if (seen.count(key))
      throw ConfigError(where() + "duplicate key '" + key + "' (first set on line " + std::to_string(seen[key]) + ")");
    seen[key] = line_no;
    if (value.empty()) throw ConfigError(where() + key + ": missing value");
    try {
      f->set(cfg, value);
    } catch (const ConfigError &e) {
      throw ConfigError(where() + e.what());
    }
    cfg.explicit_keys.insert(key);
  }
  validate_config(cfg);
  return cfg;
}

inline Config parse_config(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

/// Effective configuration in the same format (re-parses to an equal Config).
inline std::string emit_config(const Config &c) {
  std::string out;
  std::string section;
  for (const auto &f : config_fields()) {
    if (f.section != section) {
      out += (section.empty() ? "" : "\n") + ("[" + f.section + "]\n");
      section = f.section;
    }
    out += f.key + " = " + f.get(c) + "\n";
  }
  return out;
}

/// key, value, and "config" or the default's provenance.
inline std::vector<std::array<std::string, 3>> provenance_table(const Config &c) {
  std::vector<std::array<std::string, 3>> rows;
  for (const auto &f : config_fields())
    rows.push_back({f.key, f.get(c), c.explicit_keys.count(f.key) ? std::string("config") : "default: " + f.provenance});
  return rows;
}

} // namespace frozencore
