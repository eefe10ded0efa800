#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "kcorr/errors.hpp"
#include "kcorr/quantum/system.hpp"

namespace kcorr::quantum {

/// Position-basis reflection q → -q mod 1, which maps q_n to q_{n'} with
/// n' = -n - 2q̄ mod N. Only defined when 2q̄ is an integer.
inline Eigen::MatrixXd reflection_operator(const QuantumSystem& s) {
  if (s.kind != SystemKind::torus) throw SystemMismatch("reflection is defined on the torus");
  const double twice = 2.0 * s.qbar;
  if (std::abs(twice - std::round(twice)) > 1e-12) {
    throw SystemMismatch("reflection needs q̄ in {0, 1/2}");
  }
  const int shift = static_cast<int>(std::round(twice));
  const int N = s.dim;
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(N, N);
  for (int n = 0; n < N; ++n) {
    const int m = ((-n - shift) % N + N) % N;
    R(m, n) = 1.0;
  }
  return R;
}

struct SymmetryReport {
  /// max |RU - UR| for the reflection (q, p) → (-q, -p).
  double reflection_commutator = 0.0;
  /// max |U* - U†|: time reversal by plain complex conjugation K.
  double conjugation_defect = 0.0;
  /// max |A U* A† - U†| with A the position kick, i.e. T = e^{-iV(q̂)}K.
  double kicked_conjugation_defect = 0.0;
};

/// Checks the candidate symmetries of a kicked torus unitary. `position_kick`
/// holds the diagonal factor A of U = A·W.
inline SymmetryReport symmetry_report(const QuantumSystem& s, const Eigen::VectorXcd& position_kick) {
  if (s.U.size() == 0) throw PropagatorFailure("symmetry check needs a dense unitary");
  SymmetryReport r;
  const Eigen::MatrixXcd R = reflection_operator(s).cast<cplx>();
  r.reflection_commutator = (R * s.U - s.U * R).cwiseAbs().maxCoeff();
  const Eigen::MatrixXcd Ud = s.U.adjoint();
  r.conjugation_defect = (s.U.conjugate() - Ud).cwiseAbs().maxCoeff();
  const Eigen::MatrixXcd T = position_kick.asDiagonal() * s.U.conjugate() * position_kick.conjugate().asDiagonal();
  r.kicked_conjugation_defect = (T - Ud).cwiseAbs().maxCoeff();
  return r;
}

/// Diagonal position kick e^{-iNk cos 2πq_n} of the Harper unitary.
inline Eigen::VectorXcd harper_position_kick(const QuantumSystem& s, double k) {
  Eigen::VectorXcd A(s.dim);
  for (int n = 0; n < s.dim; ++n) A(n) = std::polar(1.0, -s.dim * k * std::cos(kTwoPi * s.q(n)));
  return A;
}

} // namespace kcorr::quantum
