#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kcorr/experiment/compare.hpp"
#include "kcorr/experiment/config.hpp"
#include "kcorr/experiment/csv.hpp"
#include "kcorr/experiment/pipeline.hpp"
#include "kcorr/experiment/portrait.hpp"

namespace fs = std::filesystem;
using namespace kcorr;
using namespace kcorr::experiment;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("kcorr-exp-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

} // namespace

TEST(Config, OscillatorDefaults) {
  const auto c = parse_config_text("system = oscillator\nmode = classical\n");
  EXPECT_DOUBLE_EQ(c.tau_v(), 0.1);
  EXPECT_DOUBLE_EQ(c.q0_v(), 1.0);
  EXPECT_DOUBLE_EQ(c.p0_v(), 0.0);
  EXPECT_DOUBLE_EQ(c.sigma_v(), 0.1);
  EXPECT_EQ(c.t_max_v(), 250);
}

TEST(Config, HarperDefaults) {
  const auto c = parse_config_text("system = harper\nmode = quantum-liouville\nN = 64 # comment\n");
  EXPECT_DOUBLE_EQ(c.k_v(), 0.05);
  EXPECT_DOUBLE_EQ(c.q0_v(), 0.4);
  EXPECT_DOUBLE_EQ(c.p0_v(), 0.5);
  EXPECT_DOUBLE_EQ(c.sigma_v(), 0.025);
  EXPECT_EQ(c.t_max_v(), 150);
  EXPECT_NEAR(*c.effective_hbar(), 1.0 / (2.0 * std::numbers::pi * 64), 1e-15);
}

TEST(Config, SigmaFromHbar) {
  const auto c = parse_config_text("system = harper\nmode = classical\nN = 128\nsigma = sqrt_hbar\n");
  EXPECT_NEAR(c.sigma_v(), std::sqrt(1.0 / (2.0 * std::numbers::pi * 128)), 1e-15);
}

TEST(Config, RejectsInconsistentParameters) {
  EXPECT_THROW(parse_config_text("system = harper\nmode = quantum-pure\n"), ConfigError);
  EXPECT_THROW(parse_config_text("system = oscillator\nmode = quantum-liouville\n"), ConfigError);
  EXPECT_THROW(parse_config_text("system = harper\nmode = classical\nhbar = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("system = oscillator\nk = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("system = oscillator\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("system = oscillator\ntau = abc\n"), ConfigError);
  EXPECT_THROW(parse_config_text("system = oscillator\ntau = 1\ntau = 2\n"), ConfigError);
  EXPECT_THROW(parse_config_text("system = oscillator\nmode = quantum\n"), ConfigError);
}

TEST(Config, LargeTorusNeedsStreaming) {
  EXPECT_THROW(parse_config_text("system = harper\nmode = quantum-pure\nN = 1024\n"), ConfigError);
  EXPECT_NO_THROW(parse_config_text("system = harper\nmode = quantum-pure\nN = 1024\nstorage = disk\n"));
  EXPECT_NO_THROW(parse_config_text("system = harper\nmode = quantum-pure\nN = 512\n"));
}

TEST(Config, RoundTripsThroughText) {
  const auto c = parse_config_text(
      "system = harper\nmode = quantum-ket\nN = 32\nqbar = 0.25\nt_max = 7\nportrait_times = 0, 3\n");
  const auto d = parse_config_text(config_text(c));
  EXPECT_EQ(config_text(c), config_text(d));
  EXPECT_EQ(d.portrait_times, (std::vector<int>{0, 3}));
}

TEST(Csv, SeventeenDigitsRoundTrip) {
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(fmt(x)), x);
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(split_csv("\"a,b\",1,\"x\"\"y\""), (std::vector<std::string>{"a,b", "1", "x\"y"}));
}

TEST(Compare, IdenticalSeriesGiveZero) {
  const std::vector<double> c{0.0, 1.0, 2.0, 2.5};
  const auto r = correspondence(c, c);
  for (double d : r.rel_diff) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(r.average, 0.0);
}

TEST(Compare, AverageIsMeanOfSeries) {
  const auto r = correspondence({0.0, 1.0, 2.0}, {1e-9, 1.5, 1.0});
  ASSERT_EQ(r.rel_diff.size(), 3u);
  EXPECT_NEAR(r.rel_diff[0], 1.0, 1e-12); // ε guard at t = 0
  EXPECT_NEAR(r.rel_diff[1], 0.5, 1e-15);
  EXPECT_NEAR(r.rel_diff[2], 0.5, 1e-15);
  EXPECT_NEAR(r.average, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.running_average.back(), r.average, 1e-15);
}

TEST(Compare, LengthMismatchIsAnError) {
  EXPECT_THROW(correspondence({0.0, 1.0}, {0.0}), ConfigError);
}

TEST(Run, ZeroStepRunHasSingleState) {
  const auto dir = scratch("zero");
  auto c = parse_config_text("system = oscillator\nmode = classical\nt_max = 0\n");
  c.output = dir;
  const RunData d = run_and_write(c);
  EXPECT_EQ(d.size(), 1u);
  ASSERT_EQ(d.complexity.size(), 1u);
  EXPECT_EQ(d.complexity[0], 0.0);
  EXPECT_TRUE(fs::exists(dir / "states" / "kappa_0.kcf"));
  EXPECT_FALSE(fs::exists(dir / "states" / "kappa_1.kcf"));
  const auto k0 = classical::read_kcfield(dir / "states" / "kappa_0.kcf");
  EXPECT_GE(k0.values.minCoeff(), 0.0);
  EXPECT_EQ(slurp(dir / "complexity.csv"), "t,C_K\n0,0\n");
}

TEST(Run, MetaRecordsDesignValues) {
  const auto dir = scratch("meta");
  auto c = parse_config_text("system = harper\nmode = classical\nsigma = 0.05\nt_max = 3\ngrid_M = 256\n");
  c.output = dir;
  run_and_write(c);
  const Meta m = Meta::read(dir / "meta.txt");
  for (const char* key : {"grid_M", "tol", "lattice_cutoff_J", "window_qlo", "portrait_norm", "krylov_dimension"}) {
    EXPECT_TRUE(m.get(key).has_value()) << key;
  }
  EXPECT_EQ(*m.get("grid_M"), "256");
}

TEST(Run, QuantumMetaRecordsTruncation) {
  const auto dir = scratch("qmeta");
  auto c = parse_config_text("system = oscillator\nmode = quantum-pure\nhbar = 0.0625\nt_max = 4\nportrait_M = 32\n");
  c.output = dir;
  const RunData d = run_and_write(c);
  const Meta m = Meta::read(dir / "meta.txt");
  EXPECT_TRUE(m.get("hilbert_dim").has_value());
  EXPECT_TRUE(m.get("truncation_tail").has_value());
  EXPECT_EQ(d.size(), 5u);
}

TEST(Run, IdenticalConfigsGiveIdenticalCsv) {
  const auto d1 = scratch("rep1");
  const auto d2 = scratch("rep2");
  auto c = parse_config_text("system = harper\nmode = quantum-ket\nN = 32\nt_max = 12\nportrait_M = 32\n");
  c.output = d1;
  run_and_write(c);
  c.output = d2;
  run_and_write(c);
  for (const char* f : {"sequences.csv", "complexity.csv", "wavefunction.csv"}) {
    EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
  }
  EXPECT_NE(slurp(d1 / "sequences.csv").find("a_n_imag"), std::string::npos);
}

TEST(Run, CompareIdenticalRunsWritesZeros) {
  const auto run = scratch("cmp-run");
  const auto out = scratch("cmp-out");
  auto c = parse_config_text("system = harper\nmode = classical\nsigma = 0.05\nt_max = 5\ngrid_M = 256\n");
  c.output = run;
  run_and_write(c);
  const auto reports = compare_runs(run, {run}, out);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].average, 0.0);
  EXPECT_TRUE(fs::exists(out / "compare.csv"));
  EXPECT_TRUE(fs::exists(out / "compare_avg.csv"));
}

TEST(Run, CompareRejectsDifferentLengths) {
  const auto r1 = scratch("len1");
  const auto r2 = scratch("len2");
  auto c = parse_config_text("system = harper\nmode = classical\nsigma = 0.05\nt_max = 3\ngrid_M = 256\n");
  c.output = r1;
  run_and_write(c);
  c.t_max = 4;
  c.output = r2;
  run_and_write(c);
  EXPECT_THROW(compare_runs(r1, {r2}, scratch("len-out")), ConfigError);
}

TEST(Portrait, NeedsStoredBasis) {
  const auto dir = scratch("nobasis");
  auto c = parse_config_text("system = harper\nmode = classical\nsigma = 0.05\nt_max = 2\ngrid_M = 256\n");
  c.output = dir;
  run_and_write(c);
  EXPECT_THROW(portrait_from_dir(dir, {1}), StorageError);
}

TEST(Portrait, StoredBasisReproducesRunPortraits) {
  const auto dir = scratch("basis");
  auto c = parse_config_text(
      "system = harper\nmode = quantum-liouville\nN = 32\nt_max = 4\nportrait_times = 2\n"
      "portrait_M = 64\nstore_basis = true\n");
  c.output = dir;
  run_and_write(c);
  const auto first = slurp(dir / "states" / "kappa_2.kcf");
  const auto written = portrait_from_dir(dir, {2, 3, 99});
  EXPECT_EQ(written, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(slurp(dir / "states" / "kappa_2.kcf"), first);
  const auto k3 = classical::read_kcfield(dir / "states" / "kappa_3.kcf");
  EXPECT_LT(k3.values.minCoeff(), 0.0);
  EXPECT_GT(k3.values.maxCoeff(), 0.0);
}

TEST(Portrait, DiskStorageMatchesMemory) {
  auto c = parse_config_text("system = harper\nmode = quantum-pure\nN = 32\nt_max = 10\nportrait_M = 32\n");
  const RunData mem = run_experiment(c);
  c.storage = StorageMode::disk;
  const auto spill = scratch("spill");
  const RunData disk = run_experiment(c, spill);
  ASSERT_EQ(mem.size(), disk.size());
  for (std::size_t n = 0; n < mem.size(); ++n) EXPECT_EQ(mem.a[n], disk.a[n]);
  EXPECT_EQ(mem.complexity, disk.complexity);
  EXPECT_EQ(mem.portrait(3).values, disk.portrait(3).values);
}
