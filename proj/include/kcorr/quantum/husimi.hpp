#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "kcorr/classical/field.hpp"
#include "kcorr/quantum/coherent.hpp"
#include "kcorr/quantum/system.hpp"

namespace kcorr::quantum {

namespace detail {

template <class Eval>
Eigen::VectorXd husimi_points(const QuantumSystem& s, std::span<const PhasePoint> xs, Eval&& eval) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
  constexpr std::size_t chunk = 4096;
  const double norm = 1.0 / (kTwoPi * s.hbar);
  for (std::size_t start = 0; start < xs.size(); start += chunk) {
    const std::size_t len = std::min(chunk, xs.size() - start);
    const Eigen::MatrixXcd A = coherent_block(s, xs.subspan(start, len));
    out.segment(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)) = eval(A) * norm;
  }
  return out;
}

inline std::vector<PhasePoint> grid_points(const classical::PhaseSpaceGeometry& g) {
  std::vector<PhasePoint> xs;
  xs.reserve(g.nodes());
  for (int i = 0; i < g.M; ++i) {
    for (int j = 0; j < g.M; ++j) xs.push_back({g.q(i), g.p(j)});
  }
  return xs;
}

} // namespace detail

/// H(x) = <α(x)|ρ̂|α(x)>/(2πħ) at arbitrary points.
inline Eigen::VectorXd husimi(const QuantumSystem& s, const Eigen::MatrixXcd& rho,
                              std::span<const PhasePoint> xs) {
  return detail::husimi_points(s, xs, [&](const Eigen::MatrixXcd& A) -> Eigen::VectorXd {
    const Eigen::MatrixXcd RA = rho * A;
    return (A.conjugate().cwiseProduct(RA)).colwise().sum().real().transpose();
  });
}

/// H(x) = |<α(x)|ψ>|²/(2πħ).
inline Eigen::VectorXd husimi(const QuantumSystem& s, const Eigen::VectorXcd& psi,
                              std::span<const PhasePoint> xs) {
  return detail::husimi_points(s, xs, [&](const Eigen::MatrixXcd& A) -> Eigen::VectorXd {
    return (A.adjoint() * psi).cwiseAbs2();
  });
}

template <class Op>
classical::PhaseSpaceField husimi_field(const QuantumSystem& s, const Op& op,
                                        const classical::PhaseSpaceGeometry& g) {
  const auto xs = detail::grid_points(g);
  return classical::PhaseSpaceField(g, husimi(s, op, std::span<const PhasePoint>(xs)));
}

} // namespace kcorr::quantum
