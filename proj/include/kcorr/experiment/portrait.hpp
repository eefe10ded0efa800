#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "kcorr/errors.hpp"
#include "kcorr/experiment/config.hpp"
#include "kcorr/experiment/pipeline.hpp"

namespace kcorr::experiment {

/// Re-renders portraits from a run directory written with store_basis = true.
/// The quantum system is rebuilt from config.txt and meta.txt.
inline std::vector<std::size_t> portrait_from_dir(const std::filesystem::path& dir, const std::vector<int>& times) {
  const auto basis_dir = dir / "basis";
  if (!std::filesystem::is_directory(basis_dir)) {
    throw StorageError("run directory " + dir.string() +
                       " has no stored Krylov vectors; rerun with store_basis = true");
  }
  const ExperimentConfig c = load_config(dir / "config.txt");
  Meta meta = Meta::read(dir / "meta.txt");
  const auto dim_text = meta.get("krylov_dimension");
  if (!dim_text) throw StorageError("meta.txt lacks krylov_dimension");
  const std::size_t K = std::stoul(*dim_text);

  auto open = [&](std::size_t n) {
    std::ifstream is(basis_dir / ("kappa_" + std::to_string(n) + ".bin"), std::ios::binary);
    if (!is) throw StorageError("missing stored Krylov vector " + std::to_string(n));
    return is;
  };

  RunData d;
  d.config = c;
  d.meta = meta;
  d.a.resize(K);
  if (!c.quantum()) {
    const auto g = detail::classical_geometry(c);
    const classical::FieldSpace space(g);
    d.portrait_geometry = g;
    d.portrait = [=](std::size_t n) {
      auto is = open(n);
      return space.field(space.read(is));
    };
  } else {
    quantum::QuantumSystem s;
    if (c.torus()) {
      s = quantum::harper_unitary(quantum::build_torus_system(*c.N, c.qbar, c.pbar), c.k_v());
    } else {
      const auto D = meta.get("hilbert_dim");
      if (!D) throw StorageError("meta.txt lacks hilbert_dim");
      s = quantum::oscillator_unitary(std::stoi(*D), c.tau_v(), *c.hbar);
    }
    auto sys = std::make_shared<const quantum::QuantumSystem>(std::move(s));
    const auto g = detail::quantum_portrait_geometry(c, sys->hbar);
    d.portrait_geometry = g;
    if (c.mode == RunMode::quantum_ket) {
      const quantum::KetSpace space(sys);
      d.portrait = [=](std::size_t n) {
        auto is = open(n);
        return quantum::husimi_field(*sys, Eigen::VectorXcd(space.read(is)), g);
      };
    } else {
      const quantum::OperatorSpace space(sys);
      d.portrait = [=](std::size_t n) {
        auto is = open(n);
        return quantum::husimi_field(*sys, Eigen::MatrixXcd(space.read(is)), g);
      };
    }
  }
  auto written = write_portraits(d, dir, times);
  d.meta.write(dir / "meta.txt");
  return written;
}

} // namespace kcorr::experiment
