#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "kcorr/classical/geometry.hpp"
#include "kcorr/errors.hpp"
#include "kcorr/quantum/coherent.hpp"
#include "kcorr/quantum/system.hpp"

namespace kcorr::quantum {

/// Hermitian operator on a QuantumSystem. Krylov states are operators of
/// this kind too but are generally not physical densities.
struct DensityOperator {
  Eigen::MatrixXcd rho;
  double hbar = 0.0;

  int dim() const { return static_cast<int>(rho.rows()); }
  cplx trace() const { return rho.trace(); }
  double hermiticity_defect() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
};

struct StateVector {
  Eigen::VectorXcd psi;
  double hbar = 0.0;
};

/// Weight below this fraction of the peak is dropped from the P-sum.
inline constexpr double kPWeightCutoff = 1e-16;

/// Grid nodes carrying non-negligible P weight, with quadrature weights.
struct PSupport {
  std::vector<PhasePoint> nodes;
  std::vector<double> weights;
  /// Largest |x|/√(2ħ) among the nodes, i.e. the largest coherent amplitude.
  double alpha_max = 0.0;
};

inline PSupport p_rep_support(const std::function<double(double, double)>& P,
                              const classical::PhaseSpaceGeometry& grid, double hbar) {
  double peak = 0.0;
  for (int i = 0; i < grid.M; ++i) {
    for (int j = 0; j < grid.M; ++j) peak = std::max(peak, P(grid.q(i), grid.p(j)));
  }
  if (!(peak > 0.0)) throw ResolutionError("P-distribution vanishes on the grid");
  PSupport out;
  double r2 = 0.0;
  for (int i = 0; i < grid.M; ++i) {
    for (int j = 0; j < grid.M; ++j) {
      const double w = P(grid.q(i), grid.p(j));
      if (w < kPWeightCutoff * peak) continue;
      out.nodes.push_back({grid.q(i), grid.p(j)});
      out.weights.push_back(w * grid.cell_area());
      r2 = std::max(r2, grid.q(i) * grid.q(i) + grid.p(j) * grid.p(j));
    }
  }
  out.alpha_max = std::sqrt(r2 / (2.0 * hbar));
  return out;
}

/// ρ̂ = Σ_ij P(x_ij)|α(x_ij)><α(x_ij)| Δ², Hermitized and trace-normalized.
/// Accumulated as A·A† over chunks of nodes with √weight columns.
inline DensityOperator p_rep_density(const QuantumSystem& s,
                                     const std::function<double(double, double)>& P,
                                     const classical::PhaseSpaceGeometry& grid) {
  const double delta = std::max(grid.dq(), grid.dp());
  if (delta > std::sqrt(s.hbar) / 4.0) {
    throw ResolutionError("P-representation grid spacing " + std::to_string(delta) +
                          " exceeds sqrt(hbar)/4 = " + std::to_string(std::sqrt(s.hbar) / 4.0));
  }
  const PSupport support = p_rep_support(P, grid, s.hbar);
  const auto& nodes = support.nodes;
  const auto& weights = support.weights;
  const int D = s.dim;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(D, D);
  constexpr std::size_t chunk = 2048;
  for (std::size_t start = 0; start < nodes.size(); start += chunk) {
    const std::size_t len = std::min(chunk, nodes.size() - start);
    Eigen::MatrixXcd A = coherent_block(s, std::span<const PhasePoint>(nodes.data() + start, len));
    for (std::size_t k = 0; k < len; ++k) A.col(static_cast<Eigen::Index>(k)) *= std::sqrt(weights[start + k]);
    rho.selfadjointView<Eigen::Lower>().rankUpdate(A);
  }
  DensityOperator out;
  out.rho = rho.selfadjointView<Eigen::Lower>();
  out.rho = 0.5 * (out.rho + out.rho.adjoint()).eval();
  out.rho /= std::real(out.rho.trace());
  out.hbar = s.hbar;
  return out;
}

inline DensityOperator pure_density(const QuantumSystem& s, PhasePoint x) {
  const Eigen::VectorXcd psi = coherent_state(s, x);
  return {psi * psi.adjoint(), s.hbar};
}

/// ρ̂ → Uρ̂U†.
inline Eigen::MatrixXcd conjugate(const QuantumSystem& s, const Eigen::MatrixXcd& rho) {
  if (s.U_diagonal) {
    const auto& u = *s.U_diagonal;
    return u.asDiagonal() * rho * u.conjugate().asDiagonal();
  }
  if (s.U.size() == 0) throw PropagatorFailure("system has no unitary");
  if (s.U.cols() != rho.rows()) throw PropagatorFailure("operator dimension differs from system");
  Eigen::MatrixXcd tmp = s.U * rho;
  return tmp * s.U.adjoint();
}

inline DensityOperator superop_step(const QuantumSystem& s, const DensityOperator& rho) {
  return {conjugate(s, rho.rho), rho.hbar};
}

/// (ρ̂|σ̂) = Tr(ρ̂†σ̂)/(2πħ).
inline cplx op_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, double hbar) {
  return (a.conjugate().cwiseProduct(b)).sum() / (kTwoPi * hbar);
}

inline cplx op_inner(const DensityOperator& a, const DensityOperator& b) {
  if (a.hbar != b.hbar || a.rho.rows() != b.rho.rows()) {
    throw SystemMismatch("operators belong to different systems");
  }
  return op_inner(a.rho, b.rho, a.hbar);
}

} // namespace kcorr::quantum
