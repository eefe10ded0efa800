#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>

#include "kcorr/classical/maps.hpp"
#include "kcorr/quantum/system.hpp"

namespace kcorr::quantum {

using classical::PhasePoint;

/// Periodic images kept in the torus coherent state.
inline constexpr int kCoherentImages = 3;

/// Coherent state |α(x)>. Plane: <n|α> = e^{-|α|²/2} αⁿ/√n! with
/// α = (q + ip)/√(2ħ), evaluated in log space. Torus: periodized Gaussian on
/// the position grid carrying the Floquet phase e^{-i2πp̄j} per image.
inline Eigen::VectorXcd coherent_state(const QuantumSystem& s, PhasePoint x) {
  const int D = s.dim;
  Eigen::VectorXcd psi(D);
  if (s.kind == SystemKind::plane) {
    const cplx alpha = cplx(x.q, x.p) / std::sqrt(2.0 * s.hbar);
    const double r = std::abs(alpha);
    const double theta = std::arg(alpha);
    if (r == 0.0) {
      psi.setZero();
      psi(0) = 1.0;
      return psi;
    }
    const double lr = std::log(r);
    for (int n = 0; n < D; ++n) {
      const double logmag = -0.5 * r * r + n * lr - 0.5 * std::lgamma(n + 1.0);
      psi(n) = std::polar(std::exp(logmag), n * theta);
    }
    return psi;
  }
  // e^{ip q_n/ħ} advances by a fixed ratio in n; resynchronize periodically.
  const double kq = x.p / s.hbar;
  const cplx ratio = std::polar(1.0, kq / D);
  cplx image_phase[2 * kCoherentImages + 1];
  for (int j = -kCoherentImages; j <= kCoherentImages; ++j) {
    image_phase[j + kCoherentImages] = std::polar(1.0, kq * j - kTwoPi * s.pbar * j);
  }
  cplx wave{};
  for (int n = 0; n < D; ++n) {
    const double qn = s.q(n);
    wave = (n % 64 == 0) ? std::polar(1.0, kq * qn) : wave * ratio;
    double acc_re = 0.0, acc_im = 0.0;
    for (int j = -kCoherentImages; j <= kCoherentImages; ++j) {
      const double d = qn + j - x.q;
      const double e = d * d / (2.0 * s.hbar);
      if (e > 745.0) continue;
      const double g = std::exp(-e);
      const cplx ph = image_phase[j + kCoherentImages];
      acc_re += g * ph.real();
      acc_im += g * ph.imag();
    }
    psi(n) = wave * cplx(acc_re, acc_im);
  }
  psi /= psi.norm();
  return psi;
}

/// Columns are coherent states at the given points.
inline Eigen::MatrixXcd coherent_block(const QuantumSystem& s, std::span<const PhasePoint> xs) {
  Eigen::MatrixXcd A(s.dim, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) A.col(static_cast<Eigen::Index>(k)) = coherent_state(s, xs[k]);
  return A;
}

} // namespace kcorr::quantum
