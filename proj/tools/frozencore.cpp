// frozencore command-line driver: decay, sweep, census and trend runs.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "frozencore/frozencore.hpp"

namespace fc = frozencore;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  unsigned threads = 0;
  int lattice_extent = 0;
};

fc::Config load(const Options &o) {
  fc::Config cfg = o.config_path.empty() ? fc::parse_config_text("") : fc::parse_config(o.config_path);
  if (o.seed) {
    cfg.run.seed = *o.seed;
    cfg.explicit_keys.insert("seed");
  }
  if (o.model) {
    try {
      cfg.run.model = fc::parse_bath_model(*o.model);
    } catch (const std::invalid_argument &e) {
      throw fc::ConfigError(std::string("--model: ") + e.what());
    }
    cfg.explicit_keys.insert("model");
  }
  if (!o.out_dir.empty()) cfg.output_directory = o.out_dir;
  cfg.run.threads = o.threads;
  fc::validate_config(cfg);
  return cfg;
}

struct Session {
  fc::Config cfg;
  std::string config_text;
  fc::OutputSet out;
  fc::OutputMeta meta;
  std::string log;

  explicit Session(const fc::Config &c)
      : cfg(c), config_text(fc::emit_config(c)), out(c.output_directory) {
    meta.config_sha256 = fc::sha256_hex(config_text);
    meta.seeds = c.run_spec().seeds();
    log += "frozencore " + std::string(fc::kVersion) + "\n";
    log += "config sha256 " + meta.config_sha256 + "\n";
    for (const auto &row : fc::provenance_table(c)) log += row[0] + " = " + row[1] + "    [" + row[2] + "]\n";
  }

  void note(const std::string &line) {
    log += line + "\n";
    std::cerr << line << "\n";
  }

  void finish() {
    out.write("effective_config.ini", config_text);
    out.write("run_log.txt", log);
    out.write_manifest();
  }
};

std::string num(double v) { return fc::format_number(v, 12); }

int run_decay(const Options &o) {
  Session s(load(o));
  const fc::RunSpec spec = s.cfg.run_spec();
  const fc::T2Result r = fc::ensemble_average(spec, spec.seeds(), s.cfg.donor);
  auto meta = s.meta;
  meta.extra = {{"model", fc::to_string(spec.model)},
                {"qubit_site", std::to_string(r.qubit_site.x) + " " + std::to_string(r.qubit_site.y) + " " +
                                   std::to_string(r.qubit_site.z)},
                {"qubit_J_hz", num(r.qubit_j)},
                {"excluded_seeds", std::to_string(r.excluded_seeds.size())}};
  s.out.write_csv("decay_mean.csv", fc::curve_table(r.curve, s.cfg.precision), meta);

  fc::CsvTable per({"seed", "T2n_s"}, s.cfg.precision);
  for (std::size_t i = 0; i < r.seeds.size(); ++i)
    per.row().integer(static_cast<long long>(r.seeds[i])).num(r.per_realization_t2[i]);
  s.out.write_csv("realizations.csv", per, meta);

  std::vector<fc::SummaryRow> rows{{fc::to_string(spec.model), r.qubit_j, r.seeds.size(), r.t2, fc::to_string(r.method)}};
  if (r.stretched)
    rows.push_back({fc::to_string(spec.model), r.qubit_j, r.seeds.size(), r.stretched->t2, "stretched_exp_diagnostic"});
  s.out.write_csv("summary.csv", fc::summary_table(rows, s.cfg.precision), meta);
  s.note("T2n = " + num(r.t2) + " s (" + fc::to_string(r.method) + ", " + std::to_string(r.seeds.size()) +
         " realizations, " + std::to_string(r.excluded_seeds.size()) + " excluded)");
  s.finish();
  return 0;
}

int run_sweep(const Options &o) {
  Session s(load(o));
  fc::RunSpec spec = s.cfg.run_spec();
  if (spec.model != fc::BathModel::FarBath) throw fc::ConfigError("sweep: model must be far_bath");
  const auto result = fc::convergence_sweep(spec, s.cfg.sweep_axis, s.cfg.sweep_values, spec.seeds(), s.cfg.donor);
  auto meta = s.meta;
  meta.extra = {{"axis", fc::to_string(result.axis)},
                {"converged", result.converged ? "true" : "false"},
                {"converged_value", num(result.converged_value)},
                {"tolerance", num(result.tolerance)}};
  s.out.write_csv("sweep.csv", fc::sweep_table(result, s.cfg.precision), meta);
  for (std::size_t i = 0; i < result.rows.size(); ++i)
    s.out.write_csv("sweep_curve_" + std::to_string(i) + ".csv", fc::curve_table(result.rows[i].curve, s.cfg.precision),
                    meta);
  s.note("converged at " + fc::to_string(result.axis) + " = " + num(result.converged_value));
  s.finish();
  return 0;
}

int run_census(const Options &o) {
  Session s(load(o));
  const int N = s.cfg.census_extent;
  const double p = s.cfg.run.abundance;
  const double a0 = s.cfg.donor.lattice_constant;
  std::vector<fc::ShellCensus> rows;
  for (int n = 1; n <= N; ++n) rows.push_back(fc::shell_counts_closed_form(n));
  s.out.write_csv("shell_counts.csv", fc::census_table(rows), s.meta);
  s.out.write_csv("density_isotropic.csv",
                  fc::density_table(fc::ep_density_profile(N, p, fc::CensusMode::Isotropic, a0), s.cfg.precision), s.meta);
  s.out.write_csv("density_filtered.csv",
                  fc::density_table(fc::ep_density_profile(N, p, fc::CensusMode::AnisotropyFiltered, a0), s.cfg.precision),
                  s.meta);

  fc::CsvTable totals({"N", "R_angstrom", "N_EP"}, s.cfg.precision);
  for (int n = 1; n <= N; ++n) totals.row().integer(n).num(n * a0).num(fc::total_ep_count(n, p));
  s.out.write_csv("ep_totals.csv", totals, s.meta);

  const auto fcr = fc::frozen_core_radius(s.cfg.frozen_core_linewidth, s.cfg.donor);
  fc::CsvTable core({"linewidth_hz", "R_FC_angstrom"}, s.cfg.precision);
  core.row().num(s.cfg.frozen_core_linewidth).num(fcr.radius);
  s.out.write_csv("frozen_core.csv", core, s.meta);
  if (!fcr.warning.empty()) s.note("warning: " + fcr.warning);

  if (o.lattice_extent > 0)
    s.out.write_csv("lattice.csv", fc::lattice_table(fc::generate_sites(o.lattice_extent), s.cfg.donor, s.cfg.precision),
                    s.meta);
  s.note("N_EP(R = 100 A) = " + num(fc::total_ep_count(fc::extent_for_radius(100.0, a0), p)) + ", R_FC = " +
         num(fcr.radius) + " A");
  s.finish();
  return 0;
}

int run_trend(const Options &o) {
  Session s(load(o));
  const fc::RunSpec spec = s.cfg.run_spec();
  const auto tr = fc::j_trend_study(spec, s.cfg.trend_j_values, spec.seeds(), s.cfg.donor);
  auto meta = s.meta;
  meta.extra = {{"model", fc::to_string(spec.model)}, {"slope_s_per_hz", num(tr.slope)}, {"intercept_s", num(tr.intercept)}};
  s.out.write_csv("trend.csv", fc::trend_table(tr, s.cfg.precision), meta);
  std::vector<fc::SummaryRow> rows;
  for (const auto &r : tr.rows) rows.push_back({fc::to_string(spec.model), r.qubit_j, r.kept, r.t2, fc::to_string(spec.t2_method)});
  s.out.write_csv("summary.csv", fc::summary_table(rows, s.cfg.precision), meta);
  s.note("slope = " + num(tr.slope) + " s/Hz");
  s.finish();
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Nuclear spin bath decoherence of proximate 29Si qubits near a P donor"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", o.config_path, "Config file (key = value)");
    sub->add_option("--out", o.out_dir, "Output directory (overrides [output] directory)");
    sub->add_option("--seed", o.seed, "First realization seed");
    sub->add_option("--model", o.model, "far_bath, equivalent_pairs or combined");
    sub->add_option("--threads", o.threads, "Worker threads, 0 = auto")->default_val(0);
  };
  auto *decay = app.add_subcommand("decay", "Ensemble Hahn-echo decay and T2n");
  auto *sweep = app.add_subcommand("sweep", "Far-bath convergence sweep");
  auto *census = app.add_subcommand("census", "Equivalent-pair combinatorics and frozen core");
  auto *trend = app.add_subcommand("trend", "T2n against qubit hyperfine coupling");
  for (auto *sub : {decay, sweep, census, trend}) add_common(sub);
  census->add_option("--lattice-extent", o.lattice_extent, "Also export sites and couplings for this N");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*decay) return run_decay(o);
    if (*sweep) return run_sweep(o);
    if (*census) return run_census(o);
    if (*trend) return run_trend(o);
  } catch (const fc::ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
