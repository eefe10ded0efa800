#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "kcorr/errors.hpp"
#include "kcorr/experiment/compare.hpp"
#include "kcorr/experiment/config.hpp"
#include "kcorr/experiment/pipeline.hpp"
#include "kcorr/experiment/portrait.hpp"
#include "kcorr/semiclassics/semiclassics.hpp"

namespace fs = std::filesystem;
using namespace kcorr;
using namespace kcorr::experiment;

namespace {

int cmd_run(const std::string& path) {
  const ExperimentConfig c = load_config(path);
  const RunData d = run_and_write(c);
  std::cout << "wrote " << c.output.string() << " (Krylov dimension " << d.size() << ", final C_K "
            << d.complexity.back() << ")\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out) {
  if (dirs.size() < 2) throw ConfigError("compare needs a classical run directory followed by quantum run directories");
  std::vector<fs::path> quantum(dirs.begin() + 1, dirs.end());
  const auto reports = compare_runs(dirs.front(), quantum, out);
  for (const auto& r : reports) std::cout << r.label << " average rel_diff " << fmt(r.average) << '\n';
  return 0;
}

int cmd_portrait(const std::string& dir, const std::vector<int>& times) {
  const auto written = portrait_from_dir(dir, times);
  std::cout << "wrote " << written.size() << " portraits to " << (fs::path(dir) / "states").string() << '\n';
  return 0;
}

int cmd_semiclassics(const std::string& path) {
  const ExperimentConfig c = load_config(path);
  const classical::PhasePoint x{c.q0_v(), c.p0_v()};
  quantum::QuantumSystem s;
  classical::ClassicalMapSpec map;
  if (c.torus()) {
    if (!c.N) throw ConfigError("semiclassics-check on the torus needs N");
    s = quantum::harper_unitary(quantum::build_torus_system(*c.N, c.qbar, c.pbar), c.k_v());
    map = classical::harper_map(c.k_v());
  } else {
    if (!c.hbar) throw ConfigError("semiclassics-check on the plane needs hbar");
    const double alpha = std::hypot(x.q, x.p) / std::sqrt(2.0 * *c.hbar);
    const int D = c.hilbert_dim ? c.hilbert_dim : quantum::oscillator_truncation(alpha);
    s = quantum::oscillator_unitary(D, c.tau_v(), *c.hbar, alpha);
    map = classical::oscillator_map(c.tau_v());
  }
  semiclassics::OneStepOptions opt;
  if (c.grid_M) opt.grid_M = c.grid_M;
  fs::create_directories(c.output);
  std::ofstream report(c.output / "semiclassics.txt");
  if (!report) throw StorageError("cannot write semiclassics.txt");
  for (auto dir : {semiclassics::StepDirection::forward, semiclassics::StepDirection::backward}) {
    opt.direction = dir;
    const auto r = semiclassics::one_step_check(s, map, x, opt);
    const std::string tag = dir == semiclassics::StepDirection::forward ? "forward" : "backward";
    const std::string text = "[" + tag + "]\n" + r.to_text();
    report << text;
    std::cout << text;
    classical::write_kcfield(c.output / (tag + "_husimi.kcf"), r.evolved_husimi);
    classical::write_kcfield(c.output / (tag + "_pullback.kcf"), r.pulled_back_husimi);
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Krylov spaces of quantum maps and their classical Perron-Frobenius counterparts"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "Build a Krylov space from a config file and write the run directory");
  run->add_option("config", run_config, "Config file")->required();

  std::vector<std::string> compare_dirs;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Relative complexity difference of quantum runs to a classical run");
  compare->add_option("dirs", compare_dirs, "Classical run directory, then quantum run directories")->required();
  compare->add_option("--out", compare_out, "Output directory")->required();

  std::string portrait_dir;
  std::vector<int> portrait_times;
  auto* portrait = app.add_subcommand("portrait", "Render Krylov-state portraits from a stored basis");
  portrait->add_option("dir", portrait_dir, "Run directory")->required();
  portrait->add_option("--times", portrait_times, "Krylov indices n")->required()->delimiter(',');

  std::string semi_config;
  auto* semi = app.add_subcommand("semiclassics-check", "One-step Husimi check against the classical map");
  semi->add_option("config", semi_config, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(run_config);
    if (*compare) return cmd_compare(compare_dirs, compare_out);
    if (*portrait) return cmd_portrait(portrait_dir, portrait_times);
    if (*semi) return cmd_semiclassics(semi_config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ResolutionError& e) {
    std::cerr << "config error: " << e.what() << " (refine grid_M)\n";
    return 2;
  } catch (const TruncationError& e) {
    std::cerr << "config error: " << e.what() << " (raise hilbert_dim)\n";
    return 2;
  } catch (const StorageError& e) {
    std::cerr << "storage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
