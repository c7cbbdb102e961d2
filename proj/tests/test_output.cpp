#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "frozencore/output.hpp"

using namespace frozencore;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("frozencore_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

} // namespace

TEST(Format, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(2.5e-7), "2.5e-07");
  EXPECT_EQ(format_number(3.0), "3");
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_number(1.0 / 3.0, 4), "0.3333");
}

TEST(Format, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Csv, HeaderCarriesVersionHashAndSeeds) {
  CsvTable t({"a", "b"});
  t.row().num(1.5).integer(2);
  const std::string s = t.render({"deadbeef", {3, 4}, {{"model", "ep"}}});
  const auto lines = lines_of(s);
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], std::string("# frozencore ") + kVersion);
  EXPECT_EQ(lines[1], "# config_sha256: deadbeef");
  EXPECT_EQ(lines[2], "# seeds: 3 4");
  EXPECT_EQ(lines[3], "# model: ep");
  EXPECT_EQ(lines[4], "a,b");
  EXPECT_EQ(lines[5], "1.5,2");
}

TEST(Csv, RowWidthMismatchThrows) {
  CsvTable t({"a", "b"});
  t.row().num(1.0);
  EXPECT_THROW(t.render({}), std::logic_error);
}

TEST(Csv, CurveHasOneRowPerTime) {
  CoherenceCurve c;
  c.times = make_tau_grid(1e-4, 10.0, 200);
  c.values.assign(200, 0.5);
  const auto lines = lines_of(curve_table(c).render({}));
  std::size_t data = 0, header = 0;
  for (const auto &l : lines) {
    if (l.rfind("#", 0) == 0) continue;
    if (l == "t_s,coherence") ++header; else ++data;
  }
  EXPECT_EQ(header, 1u);
  EXPECT_EQ(data, 200u);
}

TEST(OutputSetTest, IdenticalRunsGiveIdenticalBytes) {
  const DonorConfig cfg;
  RunSpec s;
  s.n_realizations = 4;
  s.exclude_direct_partner = false;
  std::string first;
  for (int run = 0; run < 2; ++run) {
    const auto dir = scratch_dir("repeat" + std::to_string(run));
    OutputSet out(dir);
    const auto r = ensemble_average(s, s.seeds(), cfg);
    out.write_csv("decay.csv", curve_table(r.curve), {"x", r.seeds, {}});
    const std::string manifest = out.write_manifest();
    const std::string bytes = slurp(dir / "decay.csv");
    if (run == 0) first = bytes + manifest;
    else EXPECT_EQ(bytes + manifest, first);
    fs::remove_all(dir);
  }
}

TEST(OutputSetTest, ManifestListsHashes) {
  const auto dir = scratch_dir("manifest");
  OutputSet out(dir);
  EXPECT_EQ(out.write_manifest(), std::string("# frozencore ") + kVersion + " manifest\n# entries: 0\n");
  out.write("a.txt", "abc");
  const auto lines = lines_of(out.write_manifest());
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1], "# entries: 1");
  EXPECT_EQ(lines[2], sha256_hex("abc") + "  3  a.txt");
  EXPECT_EQ(slurp(dir / "manifest.txt"), out.write_manifest());
  fs::remove_all(dir);
}

TEST(OutputSetTest, ErrorsNameThePath) {
  const auto dir = scratch_dir("blocker");
  fs::create_directories(dir);
  { std::ofstream(dir / "file") << "x"; }
  try {
    OutputSet bad(dir / "file" / "sub");
    FAIL() << "expected failure";
  } catch (const std::runtime_error &e) {
    EXPECT_NE(std::string(e.what()).find("file/sub"), std::string::npos) << e.what();
  }
  OutputSet ok(dir);
  fs::create_directories(dir / "taken");
  try {
    ok.write("taken", "x");
    FAIL() << "expected failure";
  } catch (const std::runtime_error &e) {
    EXPECT_NE(std::string(e.what()).find("taken"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(Tables, LatticeAndCensusShapes) {
  const DonorConfig cfg;
  const auto sites = generate_sites(1);
  const auto lines = lines_of(lattice_table(sites, cfg).render({}));
  EXPECT_EQ(lines.size(), 3 + 1 + sites.size());
  const auto census = lines_of(census_table({shell_counts_closed_form(2)}).render({}));
  EXPECT_EQ(census.size(), 3 + 1 + kMultiplicities.size());
  EXPECT_EQ(census[4], "2,48,2,96,0,0");
}
