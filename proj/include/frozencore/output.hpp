#pragma once

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include "frozencore/census.hpp"
#include "frozencore/couplings.hpp"
#include "frozencore/experiment.hpp"
#include "frozencore/lattice.hpp"
#include "frozencore/pseudospin.hpp"

namespace frozencore {

inline constexpr const char *kVersion = "1.0.0";

inline std::string format_number(double v, int precision = 12) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

inline std::string sha256_hex(const std::string &data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 digest failed");
  static const char *hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

struct OutputMeta {
  std::string config_sha256;
  std::vector<std::uint64_t> seeds;
  std::vector<std::pair<std::string, std::string>> extra;
};

class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> columns, int precision = 12)
      : columns_(std::move(columns)), precision_(precision) {}

  class Row {
  public:
    Row(CsvTable &t) : table_(t) {}
    Row &num(double v) { cells_.push_back(format_number(v, table_.precision_)); return *this; }
    Row &integer(long long v) { cells_.push_back(std::to_string(v)); return *this; }
    Row &text(std::string v) { cells_.push_back(std::move(v)); return *this; }
    ~Row() { table_.rows_.push_back(std::move(cells_)); }

  private:
    CsvTable &table_;
    std::vector<std::string> cells_;
  };

  Row row() { return Row(*this); }
  std::size_t size() const { return rows_.size(); }

  std::string render(const OutputMeta &meta) const {
    std::string out = "# frozencore " + std::string(kVersion) + "\n";
    out += "# config_sha256: " + (meta.config_sha256.empty() ? std::string("none") : meta.config_sha256) + "\n";
    out += "# seeds:";
    for (auto s : meta.seeds) out += " " + std::to_string(s);
    out += "\n";
    for (const auto &[k, v] : meta.extra) out += "# " + k + ": " + v + "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
    out += "\n";
    for (const auto &r : rows_) {
      if (r.size() != columns_.size()) throw std::logic_error("csv row width does not match the header");
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += "\n";
    }
    return out;
  }

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
  int precision_;
};

struct ManifestEntry {
  std::string file;
  std::string sha256;
  std::size_t bytes = 0;
};

/// Writes files into one output directory and records their hashes.
class OutputSet {
public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  const std::filesystem::path &directory() const { return dir_; }
  const std::vector<ManifestEntry> &entries() const { return entries_; }

  void write(const std::string &name, const std::string &content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "': " + std::strerror(errno));
    out << content;
    out.close();
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
    entries_.push_back({name, sha256_hex(content), content.size()});
  }

  void write_csv(const std::string &name, const CsvTable &table, const OutputMeta &meta) {
    write(name, table.render(meta));
  }

  /// manifest.txt: "<sha256>  <bytes>  <file>" per file written so far.
  std::string write_manifest() {
    std::string m = "# frozencore " + std::string(kVersion) + " manifest\n";
    m += "# entries: " + std::to_string(entries_.size()) + "\n";
    for (const auto &e : entries_) m += e.sha256 + "  " + std::to_string(e.bytes) + "  " + e.file + "\n";
    const auto path = dir_ / "manifest.txt";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "': " + std::strerror(errno));
    out << m;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
    return m;
  }

private:
  std::filesystem::path dir_;
  std::vector<ManifestEntry> entries_;
};

// ---------------------------------------------------------------------------
// Tables

inline CsvTable curve_table(const CoherenceCurve &curve, int precision = 12) {
  CsvTable t({"t_s", "coherence"}, precision);
  for (std::size_t i = 0; i < curve.times.size(); ++i) t.row().num(curve.times[i]).num(curve.values[i]);
  return t;
}

inline CsvTable lattice_table(const std::vector<LatticeSite> &sites, const DonorConfig &cfg, int precision = 12) {
  CsvTable t({"n1", "n2", "n3", "class", "x_angstrom", "y_angstrom", "z_angstrom", "J_hz", "C_en_hz"}, precision);
  for (const auto &s : sites) {
    const Vec3 r = s.position(cfg.lattice_constant);
    const double cen = s.n.is_zero() ? 0.0 : electron_nuclear_dipolar(r, cfg);
    t.row().integer(s.n.x).integer(s.n.y).integer(s.n.z).text(to_string(s.basis_class)).num(r.x).num(r.y).num(r.z)
        .num(contact_J(r, cfg)).num(cen);
  }
  return t;
}

inline CsvTable census_table(const std::vector<ShellCensus> &rows) {
  CsvTable t({"N", "ns", "shells", "class1_sites", "class2_sites", "class3_sites"});
  for (const auto &c : rows)
    for (std::size_t i = 0; i < kMultiplicities.size(); ++i)
      t.row().integer(c.N).integer(kMultiplicities[i]).integer(c.shells[i]).integer(c.class_sites[0][i])
          .integer(c.class_sites[1][i]).integer(c.class_sites[2][i]);
  return t;
}

inline CsvTable density_table(const std::vector<DensityRow> &rows, int precision = 12) {
  CsvTable t({"N", "R_angstrom", "ns", "shells", "zeta", "density"}, precision);
  for (const auto &r : rows)
    t.row().integer(r.N).num(r.radius).text(r.ns == 0 ? "total" : std::to_string(r.ns)).num(r.shells).num(r.zeta)
        .num(r.density);
  return t;
}

inline CsvTable sweep_table(const SweepResult &s, int precision = 12) {
  CsvTable t({to_string(s.axis), "T2n_s", "relative_change"}, precision);
  for (const auto &r : s.rows) t.row().num(r.value).num(r.t2).num(r.relative_change);
  return t;
}

inline CsvTable trend_table(const TrendResult &tr, int precision = 12) {
  CsvTable t({"target_J_hz", "n1", "n2", "n3", "qubit_J_hz", "T2n_s", "kept", "excluded"}, precision);
  for (const auto &r : tr.rows)
    t.row().num(r.target_j).integer(r.qubit_site.x).integer(r.qubit_site.y).integer(r.qubit_site.z).num(r.qubit_j)
        .num(r.t2).integer(static_cast<long long>(r.kept)).integer(static_cast<long long>(r.excluded));
  return t;
}

struct SummaryRow {
  std::string model;
  double j = 0.0;
  std::size_t seed_count = 0;
  double t2 = 0.0;
  std::string method;
};

inline CsvTable summary_table(const std::vector<SummaryRow> &rows, int precision = 12) {
  CsvTable t({"model", "J_hz", "seed_count", "T2n_s", "method"}, precision);
  for (const auto &r : rows)
    t.row().text(r.model).num(r.j).integer(static_cast<long long>(r.seed_count)).num(r.t2).text(r.method);
  return t;
}

} // namespace frozencore
