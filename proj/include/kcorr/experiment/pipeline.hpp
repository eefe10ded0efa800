#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kcorr/classical/field.hpp"
#include "kcorr/classical/geometry.hpp"
#include "kcorr/classical/maps.hpp"
#include "kcorr/classical/perron_frobenius.hpp"
#include "kcorr/classical/space.hpp"
#include "kcorr/errors.hpp"
#include "kcorr/experiment/config.hpp"
#include "kcorr/experiment/csv.hpp"
#include "kcorr/krylov/arnoldi.hpp"
#include "kcorr/quantum/density.hpp"
#include "kcorr/quantum/husimi.hpp"
#include "kcorr/quantum/space.hpp"
#include "kcorr/quantum/system.hpp"

namespace kcorr::experiment {

using classical::PhaseSpaceField;
using classical::PhaseSpaceGeometry;
using krylov::cplx;

/// Ordered key/value metadata written to meta.txt.
class Meta {
public:
  void set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : items_) {
      if (k == key) {
        v = value;
        return;
      }
    }
    items_.emplace_back(key, value);
  }
  void set(const std::string& key, double value) { set(key, shortest(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }
  void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

  std::optional<std::string> get(const std::string& key) const {
    for (const auto& [k, v] : items_) {
      if (k == key) return v;
    }
    return std::nullopt;
  }

  const auto& items() const { return items_; }

  void write(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw StorageError("cannot write " + path.string());
    for (const auto& [k, v] : items_) os << k << " = " << v << '\n';
  }

  static Meta read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot read " + path.string());
    Meta m;
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find(" = ");
      if (eq != std::string::npos) m.set(line.substr(0, eq), line.substr(eq + 3));
    }
    return m;
  }

private:
  std::vector<std::pair<std::string, std::string>> items_;
};

/// Space-independent view of a finished run.
struct RunData {
  ExperimentConfig config;
  std::vector<cplx> a, b, c;
  double b_next = 0.0;
  Eigen::MatrixXcd beta; // (n, t)
  std::vector<double> complexity;
  double norm_drift = 0.0;
  std::optional<std::size_t> terminated_at;
  bool linear_dependence = false;
  Meta meta;
  /// Geometry on which portraits are sampled.
  PhaseSpaceGeometry portrait_geometry;
  /// Classical field of κ_n, or the Husimi function of the quantum κ_n.
  std::function<PhaseSpaceField(std::size_t)> portrait;
  /// Writes basis vector n in the space's binary format.
  std::function<void(std::size_t, std::ostream&)> write_vector;

  std::size_t size() const { return a.size(); }
  bool complex_valued() const { return config.mode == RunMode::quantum_ket; }
};

namespace detail {

inline krylov::StorageOptions storage_options(const ExperimentConfig& c, const std::filesystem::path& spill) {
  krylov::StorageOptions s;
  if (c.storage == StorageMode::disk) {
    s.memory_budget_bytes = c.memory_budget_mb > 0
                                ? static_cast<std::size_t>(c.memory_budget_mb * 1024.0 * 1024.0)
                                : 0;
    s.spill_directory = spill;
  } else if (c.memory_budget_mb > 0) {
    s.memory_budget_bytes = static_cast<std::size_t>(c.memory_budget_mb * 1024.0 * 1024.0);
    s.spill_directory = spill;
  }
  return s;
}

/// Plane window for the classical run and the P-representation quadrature.
inline PhaseSpaceGeometry classical_geometry(const ExperimentConfig& c) {
  if (c.torus()) return PhaseSpaceGeometry::torus(c.grid_M ? c.grid_M : 512);
  const double sigma = c.sigma_v();
  if (c.window_L == 0 && c.grid_M == 0) return PhaseSpaceGeometry::plane_for(c.q0_v(), c.p0_v(), sigma);
  const double L = c.window_L != 0 ? c.window_L : std::hypot(c.q0_v(), c.p0_v()) + 8.0 * sigma;
  int M = c.grid_M;
  if (M == 0) {
    M = static_cast<int>(std::ceil(2.0 * L / (sigma / 8.0)));
    M += M % 2;
  }
  return PhaseSpaceGeometry::plane(L, M);
}

/// Husimi portraits are wider than the classical density by √ħ.
inline PhaseSpaceGeometry quantum_portrait_geometry(const ExperimentConfig& c, double hbar) {
  if (c.torus()) return PhaseSpaceGeometry::torus(c.portrait_M ? c.portrait_M : 256);
  const double width = std::sqrt(c.sigma_v() * c.sigma_v() + hbar);
  const double L = c.window_L != 0 ? c.window_L : std::hypot(c.q0_v(), c.p0_v()) + 8.0 * width;
  return PhaseSpaceGeometry::plane(L, c.portrait_M ? c.portrait_M : 128);
}

inline classical::ClassicalMapSpec classical_map(const ExperimentConfig& c) {
  return c.system == SystemType::oscillator ? classical::oscillator_map(c.tau_v()) : classical::harper_map(c.k_v());
}

template <class V>
void copy_sequences(RunData& d, const krylov::KrylovResult<V>& r) {
  d.a = r.a;
  d.b = r.b;
  d.c = r.c;
  d.b_next = r.b_next;
  d.beta = r.beta;
  d.complexity = r.complexity;
  d.norm_drift = r.norm_drift;
  d.terminated_at = r.terminated_at;
  d.linear_dependence = r.linear_dependence;
}

/// A zero-step run keeps only κ₀ and t = 0.
inline void truncate_to_zero_steps(RunData& d) {
  d.a.resize(1);
  d.b.resize(1);
  d.c.resize(1);
  d.beta = Eigen::MatrixXcd::Ones(1, 1);
  d.complexity = {0.0};
}

inline void common_meta(RunData& d) {
  const auto& c = d.config;
  Meta& m = d.meta;
  m.set("system", std::string(to_string(c.system)));
  m.set("mode", std::string(to_string(c.mode)));
  if (c.tau) m.set("tau", *c.tau);
  if (c.k) m.set("k", *c.k);
  m.set("q0", c.q0_v());
  m.set("p0", c.p0_v());
  m.set("sigma", c.sigma_v());
  if (const auto h = c.effective_hbar()) m.set("hbar", *h);
  if (c.N) m.set("N", *c.N);
  if (c.torus()) {
    m.set("qbar", c.qbar);
    m.set("pbar", c.pbar);
  }
  m.set("t_max", c.t_max_v());
  m.set("tol", c.tol);
  m.set("storage", std::string(c.storage == StorageMode::disk ? "disk" : "memory"));
  m.set("memory_budget_mb", c.memory_budget_mb);
  m.set("store_basis", c.store_basis);
}

inline void result_meta(RunData& d) {
  Meta& m = d.meta;
  m.set("krylov_dimension", d.size());
  m.set("b_next", d.b_next);
  m.set("norm_drift", d.norm_drift);
  m.set("terminated", d.terminated_at.has_value());
  if (d.terminated_at) m.set("terminated_at", *d.terminated_at);
  m.set("linear_dependence", d.linear_dependence);
  m.set("relative_difference_epsilon", 1e-9);
}

inline RunData run_classical(const ExperimentConfig& c, const std::filesystem::path& spill) {
  RunData d;
  d.config = c;
  const PhaseSpaceGeometry g = classical_geometry(c);
  const auto map = classical_map(c);
  const auto rho0 = classical::gaussian_initial({c.q0_v(), c.p0_v()}, c.sigma_v(), g);
  classical::FieldSpace space(g);

  krylov::BuildOptions opts;
  opts.tol = c.tol;
  opts.storage = storage_options(c, spill);
  const int steps = std::max(c.t_max_v(), 1);
  auto state = std::make_shared<classical::BackTrajectoryState>(classical::BackTrajectoryState::start(g, rho0));
  auto gen = [&](std::size_t t) -> Eigen::VectorXd {
    if (t > 0) *state = classical::pf_evolve(std::move(*state), map);
    return state->materialize().values;
  };
  auto result = std::make_shared<krylov::KrylovResult<Eigen::VectorXd>>(
      krylov::gram_schmidt_build(space, static_cast<std::size_t>(steps) + 2, gen, opts));
  copy_sequences(d, *result);
  if (c.t_max_v() == 0) truncate_to_zero_steps(d);

  common_meta(d);
  d.meta.set("geometry", std::string(classical::to_string(g.kind)));
  d.meta.set("grid_M", g.M);
  d.meta.set("window_qlo", g.qlo);
  d.meta.set("window_qhi", g.qhi);
  d.meta.set("window_plo", g.plo);
  d.meta.set("window_phi", g.phi);
  if (g.kind == classical::GeometryKind::plane) d.meta.set("window_L", g.qhi);
  d.meta.set("lattice_cutoff_J", rho0.periodic ? rho0.J : 0);
  d.meta.set("quadrature", std::string("midpoint rule on cell centres"));
  d.meta.set("krylov_path", std::string("gram-schmidt"));
  result_meta(d);

  d.portrait_geometry = g;
  d.portrait = [result, space](std::size_t n) {
    return result->basis.visit(n, [&](const Eigen::VectorXd& v) { return space.field(v); });
  };
  d.write_vector = [result, space](std::size_t n, std::ostream& os) {
    result->basis.visit(n, [&](const Eigen::VectorXd& v) { space.write(v, os); });
  };
  return d;
}

/// Quantum system, initial vector and portrait grid for a quantum run.
struct QuantumSetup {
  std::shared_ptr<const quantum::QuantumSystem> system;
  std::optional<Eigen::MatrixXcd> rho0;
  std::optional<Eigen::VectorXcd> psi0;
  PhaseSpaceGeometry p_grid;
  double alpha_max = 0.0;
};

inline QuantumSetup quantum_setup(const ExperimentConfig& c) {
  QuantumSetup q;
  const classical::PhasePoint x0{c.q0_v(), c.p0_v()};
  const double sigma = c.sigma_v();
  const bool liouville = c.mode == RunMode::quantum_liouville;
  std::function<double(double, double)> P;
  quantum::PSupport support;
  if (liouville) {
    q.p_grid = classical_geometry(c);
    const auto dist = classical::gaussian_initial(x0, sigma, q.p_grid);
    P = [dist](double qq, double pp) { return dist(qq, pp); };
    support = quantum::p_rep_support(P, q.p_grid, *c.effective_hbar());
    q.alpha_max = support.alpha_max;
  }

  quantum::QuantumSystem s;
  if (c.torus()) {
    s = quantum::harper_unitary(quantum::build_torus_system(*c.N, c.qbar, c.pbar), c.k_v());
  } else {
    const double hbar = *c.hbar;
    if (!liouville) q.alpha_max = std::hypot(c.q0_v(), c.p0_v()) / std::sqrt(2.0 * hbar);
    const int D = c.hilbert_dim ? c.hilbert_dim : quantum::oscillator_truncation(q.alpha_max);
    s = quantum::oscillator_unitary(D, c.tau_v(), hbar, q.alpha_max);
  }
  q.system = std::make_shared<const quantum::QuantumSystem>(std::move(s));

  if (liouville) {
    q.rho0 = quantum::p_rep_density(*q.system, P, q.p_grid).rho;
  } else if (c.mode == RunMode::quantum_pure) {
    q.rho0 = quantum::pure_density(*q.system, x0).rho;
  } else {
    q.psi0 = quantum::coherent_state(*q.system, x0);
  }
  return q;
}

inline RunData run_quantum(const ExperimentConfig& c, const std::filesystem::path& spill) {
  RunData d;
  d.config = c;
  QuantumSetup q = quantum_setup(c);
  const auto sys = q.system;

  krylov::BuildOptions opts;
  opts.max_steps = static_cast<std::size_t>(std::max(c.t_max_v(), 1));
  opts.tol = c.tol;
  opts.storage = storage_options(c, spill);
  d.portrait_geometry = quantum_portrait_geometry(c, sys->hbar);

  if (q.rho0) {
    const quantum::OperatorSpace space(sys);
    auto result = std::make_shared<krylov::KrylovResult<Eigen::MatrixXcd>>(krylov::arnoldi_build(space, *q.rho0, opts));
    copy_sequences(d, *result);
    const auto g = d.portrait_geometry;
    d.portrait = [result, sys, g](std::size_t n) {
      return result->basis.visit(n, [&](const Eigen::MatrixXcd& m) { return quantum::husimi_field(*sys, m, g); });
    };
    d.write_vector = [result, space](std::size_t n, std::ostream& os) {
      result->basis.visit(n, [&](const Eigen::MatrixXcd& m) { space.write(m, os); });
    };
  } else {
    const quantum::KetSpace space(sys);
    auto result = std::make_shared<krylov::KrylovResult<Eigen::VectorXcd>>(krylov::arnoldi_build(space, *q.psi0, opts));
    copy_sequences(d, *result);
    const auto g = d.portrait_geometry;
    d.portrait = [result, sys, g](std::size_t n) {
      return result->basis.visit(n, [&](const Eigen::VectorXcd& v) { return quantum::husimi_field(*sys, v, g); });
    };
    d.write_vector = [result, space](std::size_t n, std::ostream& os) {
      result->basis.visit(n, [&](const Eigen::VectorXcd& v) { space.write(v, os); });
    };
  }
  if (c.t_max_v() == 0) truncate_to_zero_steps(d);

  common_meta(d);
  d.meta.set("hilbert_dim", sys->dim);
  if (!c.torus()) {
    d.meta.set("truncation_alpha_max", q.alpha_max);
    d.meta.set("truncation_tail", quantum::coherent_tail(q.alpha_max, sys->dim));
  }
  if (c.mode == RunMode::quantum_liouville) {
    d.meta.set("p_rep_grid_M", q.p_grid.M);
    d.meta.set("p_rep_window_qlo", q.p_grid.qlo);
    d.meta.set("p_rep_window_qhi", q.p_grid.qhi);
    d.meta.set("p_rep_window_plo", q.p_grid.plo);
    d.meta.set("p_rep_window_phi", q.p_grid.phi);
    d.meta.set("p_rep_weight_cutoff", quantum::kPWeightCutoff);
    d.meta.set("p_rep_quadrature", std::string("midpoint rule, trace renormalized"));
    if (c.torus()) d.meta.set("lattice_cutoff_J", classical::lattice_cutoff(c.sigma_v()));
  }
  d.meta.set("krylov_path", std::string("arnoldi"));
  d.meta.set("portrait_geometry", std::string(classical::to_string(d.portrait_geometry.kind)));
  d.meta.set("portrait_M", d.portrait_geometry.M);
  d.meta.set("portrait_window_qlo", d.portrait_geometry.qlo);
  d.meta.set("portrait_window_qhi", d.portrait_geometry.qhi);
  result_meta(d);
  return d;
}

} // namespace detail

/// Builds the Krylov space described by `c`. Spilled vectors go to `spill`.
inline RunData run_experiment(const ExperimentConfig& c,
                              const std::filesystem::path& spill = std::filesystem::temp_directory_path()) {
  return c.quantum() ? detail::run_quantum(c, spill) : detail::run_classical(c, spill);
}

inline std::string config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "system = " << to_string(c.system) << '\n';
  os << "mode = " << to_string(c.mode) << '\n';
  if (c.tau) os << "tau = " << shortest(*c.tau) << '\n';
  if (c.k) os << "k = " << shortest(*c.k) << '\n';
  os << "q0 = " << shortest(c.q0_v()) << '\n';
  os << "p0 = " << shortest(c.p0_v()) << '\n';
  if (c.sigma_sqrt_hbar) os << "sigma = sqrt_hbar\n";
  else os << "sigma = " << shortest(*c.sigma) << '\n';
  if (c.hbar) os << "hbar = " << shortest(*c.hbar) << '\n';
  if (c.N) os << "N = " << *c.N << '\n';
  if (c.torus()) os << "qbar = " << shortest(c.qbar) << "\npbar = " << shortest(c.pbar) << '\n';
  os << "t_max = " << c.t_max_v() << '\n';
  if (c.grid_M) os << "grid_M = " << c.grid_M << '\n';
  if (c.window_L != 0) os << "window_L = " << shortest(c.window_L) << '\n';
  os << "tol = " << shortest(c.tol) << '\n';
  os << "output = " << c.output.string() << '\n';
  os << "portrait_times = ";
  for (std::size_t i = 0; i < c.portrait_times.size(); ++i) os << (i ? "," : "") << c.portrait_times[i];
  os << '\n';
  if (c.portrait_M) os << "portrait_M = " << c.portrait_M << '\n';
  os << "storage = " << (c.storage == StorageMode::disk ? "disk" : "memory") << '\n';
  if (c.memory_budget_mb > 0) os << "memory_budget_mb = " << shortest(c.memory_budget_mb) << '\n';
  os << "store_basis = " << (c.store_basis ? "true" : "false") << '\n';
  if (c.hilbert_dim) os << "hilbert_dim = " << c.hilbert_dim << '\n';
  return os.str();
}

/// Writes portraits of κ_n for the requested n (those beyond the basis are
/// skipped) and records the κ₀ normalization constant.
inline std::vector<std::size_t> write_portraits(RunData& d, const std::filesystem::path& dir,
                                                const std::vector<int>& times) {
  std::filesystem::create_directories(dir / "states");
  const PhaseSpaceField k0 = d.portrait(0);
  d.meta.set("portrait_norm", k0.values.cwiseAbs().maxCoeff());
  std::vector<std::size_t> written;
  std::ostringstream skipped;
  for (int n : times) {
    const auto un = static_cast<std::size_t>(n);
    if (un >= d.size()) {
      skipped << (skipped.tellp() > 0 ? "," : "") << n;
      continue;
    }
    const PhaseSpaceField f = un == 0 ? k0 : d.portrait(un);
    classical::write_kcfield(dir / "states" / ("kappa_" + std::to_string(n) + ".kcf"), f);
    written.push_back(un);
  }
  std::string list;
  for (std::size_t i = 0; i < written.size(); ++i) list += (i ? "," : "") + std::to_string(written[i]);
  d.meta.set("portrait_times", list);
  if (skipped.tellp() > 0) d.meta.set("portrait_times_skipped", skipped.str());
  return written;
}

/// Writes the run directory: CSV tables, meta.txt, config.txt, portraits and
/// optionally the full basis.
inline void write_run(RunData& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const bool cx = d.complex_valued();
  {
    CsvWriter w = cx ? CsvWriter(dir / "sequences.csv", {"n", "a_n", "b_n", "c_n", "a_n_imag", "b_n_imag", "c_n_imag"})
                     : CsvWriter(dir / "sequences.csv", {"n", "a_n", "b_n", "c_n"});
    for (std::size_t n = 0; n < d.size(); ++n) {
      std::vector<std::string> row{std::to_string(n), fmt(d.a[n].real()), fmt(d.b[n].real()), fmt(d.c[n].real())};
      if (cx) {
        row.push_back(fmt(d.a[n].imag()));
        row.push_back(fmt(d.b[n].imag()));
        row.push_back(fmt(d.c[n].imag()));
      }
      w.row(row);
    }
  }
  {
    CsvWriter w(dir / "complexity.csv", {"t", "C_K"});
    for (std::size_t t = 0; t < d.complexity.size(); ++t) w.row({std::to_string(t), fmt(d.complexity[t])});
  }
  {
    CsvWriter w = cx ? CsvWriter(dir / "wavefunction.csv", {"t", "n", "beta", "beta_imag"})
                     : CsvWriter(dir / "wavefunction.csv", {"t", "n", "beta"});
    for (Eigen::Index t = 0; t < d.beta.cols(); ++t) {
      for (Eigen::Index n = 0; n < d.beta.rows(); ++n) {
        std::vector<std::string> row{std::to_string(t), std::to_string(n), fmt(d.beta(n, t).real())};
        if (cx) row.push_back(fmt(d.beta(n, t).imag()));
        w.row(row);
      }
    }
  }
  write_portraits(d, dir, d.config.portrait_times);
  if (d.config.store_basis) {
    std::filesystem::create_directories(dir / "basis");
    for (std::size_t n = 0; n < d.size(); ++n) {
      std::ofstream os(dir / "basis" / ("kappa_" + std::to_string(n) + ".bin"), std::ios::binary);
      if (!os) throw StorageError("cannot write basis vector " + std::to_string(n));
      d.write_vector(n, os);
    }
    d.meta.set("basis_directory", std::string("basis"));
  }
  {
    std::ofstream os(dir / "config.txt");
    if (!os) throw StorageError("cannot write config.txt");
    os << config_text(d.config);
  }
  d.meta.write(dir / "meta.txt");
}

inline RunData run_and_write(const ExperimentConfig& c) {
  RunData d = run_experiment(c, c.output / ".spill");
  write_run(d, c.output);
  std::error_code ec;
  std::filesystem::remove_all(c.output / ".spill", ec);
  return d;
}

} // namespace kcorr::experiment
