#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

#include "kcorr/errors.hpp"

namespace kcorr::quantum {

using cplx = std::complex<double>;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class SystemKind { torus, plane };

/// Finite Hilbert space with its one-step unitary. Torus systems carry the
/// phased Fourier kernel F_nm = <q_n|p_m>; plane systems are truncated
/// number bases. A diagonal propagator is stored as a vector only.
struct QuantumSystem {
  SystemKind kind = SystemKind::torus;
  int dim = 0;
  double hbar = 0.0;
  double qbar = 0.0;
  double pbar = 0.0;
  Eigen::MatrixXcd F;
  Eigen::MatrixXcd U;
  std::optional<Eigen::VectorXcd> U_diagonal;

  double q(int n) const { return (n + qbar) / dim; }
  double p(int m) const { return (m + pbar) / dim; }
  bool has_unitary() const { return U.size() > 0 || U_diagonal.has_value(); }

  Eigen::MatrixXcd unitary_matrix() const {
    if (U_diagonal) return U_diagonal->asDiagonal();
    if (U.size() == 0) throw PropagatorFailure("system has no unitary");
    return U;
  }

  bool same_space(const QuantumSystem& o) const {
    return kind == o.kind && dim == o.dim && hbar == o.hbar && qbar == o.qbar && pbar == o.pbar;
  }
};

/// Torus with 2πħN = 1 and Floquet phases (q̄, p̄).
inline QuantumSystem build_torus_system(int N, double qbar, double pbar) {
  if (N < 2) throw ConfigError("torus dimension must be at least 2");
  if (qbar < 0.0 || qbar >= 1.0 || pbar < 0.0 || pbar >= 1.0) {
    throw ConfigError("Floquet phases must lie in [0, 1)");
  }
  QuantumSystem s;
  s.kind = SystemKind::torus;
  s.dim = N;
  s.hbar = 1.0 / (kTwoPi * N);
  s.qbar = qbar;
  s.pbar = pbar;
  s.F.resize(N, N);
  const double inv = 1.0 / std::sqrt(static_cast<double>(N));
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < N; ++m) {
      s.F(n, m) = std::polar(inv, kTwoPi * (n + qbar) * (m + pbar) / N);
    }
  }
  return s;
}

/// U = e^{-i f(q̂)/ħ} e^{-i g(p̂)/ħ} for kick potentials f, g, with the
/// momentum factor applied through the Fourier kernel.
inline QuantumSystem kicked_unitary(QuantumSystem s, const std::function<double(double)>& f,
                                    const std::function<double(double)>& g) {
  if (s.kind != SystemKind::torus) throw SystemMismatch("kicked unitaries need a torus system");
  const int N = s.dim;
  Eigen::VectorXcd A(N), B(N);
  for (int n = 0; n < N; ++n) {
    A(n) = std::polar(1.0, -f(s.q(n)) / s.hbar);
    B(n) = std::polar(1.0, -g(s.p(n)) / s.hbar);
  }
  s.U = A.asDiagonal() * (s.F * B.asDiagonal() * s.F.adjoint());
  s.U_diagonal.reset();
  return s;
}

/// Harper Floquet operator e^{-iNk cos 2πq̂} e^{-iNk cos 2πp̂}.
inline QuantumSystem harper_unitary(QuantumSystem s, double k) {
  if (s.kind != SystemKind::torus) throw SystemMismatch("Harper map lives on the torus");
  const int N = s.dim;
  Eigen::VectorXcd A(N), B(N);
  for (int n = 0; n < N; ++n) {
    A(n) = std::polar(1.0, -N * k * std::cos(kTwoPi * s.q(n)));
    B(n) = std::polar(1.0, -N * k * std::cos(kTwoPi * s.p(n)));
  }
  s.U = A.asDiagonal() * (s.F * B.asDiagonal() * s.F.adjoint());
  s.U_diagonal.reset();
  return s;
}

/// Truncation rule D = ceil(|α|² + 12|α| + 20) for the largest coherent
/// amplitude |α| that must be represented.
inline int oscillator_truncation(double alpha_max) {
  return static_cast<int>(std::ceil(alpha_max * alpha_max + 12.0 * alpha_max + 20.0));
}

/// Population of number states n >= D in a coherent state of amplitude |α|.
inline double coherent_tail(double alpha, int D) {
  const double mean = alpha * alpha;
  if (mean == 0.0) return D > 0 ? 0.0 : 1.0;
  // Poisson tail summed in log space from n = D upward.
  double total = 0.0;
  double logp = -mean + D * std::log(mean) - std::lgamma(D + 1.0);
  for (int n = D; n < D + 4000; ++n) {
    const double term = std::exp(logp);
    total += term;
    if (n > mean && term < 1e-300) break;
    logp += std::log(mean) - std::log(n + 1.0);
  }
  return total;
}

/// Number-basis oscillator with U = e^{-iτ(n+1/2)}; throws TruncationError
/// when a coherent state of amplitude alpha_max leaks past D - 1.
inline QuantumSystem oscillator_unitary(int D, double tau, double hbar, double alpha_max = 0.0) {
  if (D < 1) throw ConfigError("truncation dimension must be positive");
  if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
  const double tail = coherent_tail(alpha_max, D);
  if (tail >= 1e-12) {
    throw TruncationError("population " + std::to_string(tail) + " beyond D = " + std::to_string(D));
  }
  QuantumSystem s;
  s.kind = SystemKind::plane;
  s.dim = D;
  s.hbar = hbar;
  Eigen::VectorXcd u(D);
  for (int n = 0; n < D; ++n) u(n) = std::polar(1.0, -tau * (n + 0.5));
  s.U_diagonal = std::move(u);
  return s;
}

} // namespace kcorr::quantum
