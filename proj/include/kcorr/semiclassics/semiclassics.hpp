#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "kcorr/classical/field.hpp"
#include "kcorr/classical/geometry.hpp"
#include "kcorr/classical/maps.hpp"
#include "kcorr/errors.hpp"
#include "kcorr/quantum/coherent.hpp"
#include "kcorr/quantum/husimi.hpp"
#include "kcorr/quantum/system.hpp"

namespace kcorr::semiclassics {

using classical::ClassicalMapSpec;
using classical::PhasePoint;
using cplx = std::complex<double>;

struct SqueezeParams {
  cplx sigma{1.0, 0.0}; // 1 - g''f'' + ig''
  double delta = 0.0;   // g'' - f'' + g''f''
  double f2 = 0.0;
  double g2 = 0.0;
  PhasePoint at;        // (q, p') where f'' and g'' were read
};

inline SqueezeParams squeeze_from_curvatures(double f2, double g2) {
  SqueezeParams s;
  s.f2 = f2;
  s.g2 = g2;
  s.sigma = cplx(1.0 - g2 * f2, g2);
  s.delta = g2 - f2 + g2 * f2;
  return s;
}

inline const classical::KickData& require_kick(const ClassicalMapSpec& map) {
  if (!map.kick) throw MissingKickData("map '" + map.name + "' has no kick curvatures");
  return *map.kick;
}

/// Inverse-step convention: f'' at q and g'' at p' = p + f'(q).
inline SqueezeParams squeeze_params(const ClassicalMapSpec& map, PhasePoint x) {
  const auto& k = require_kick(map);
  const double pp = x.p + k.f1(x.q);
  auto s = squeeze_from_curvatures(k.f2(x.q), k.g2(pp));
  s.at = {x.q, pp};
  return s;
}

/// Forward-step counterpart: g'' at p and f'' at q' = q + g'(p).
inline SqueezeParams forward_squeeze_params(const ClassicalMapSpec& map, PhasePoint x) {
  const auto& k = require_kick(map);
  const double qq = x.q + k.g1(x.p);
  auto s = squeeze_from_curvatures(k.f2(qq), k.g2(x.p));
  s.at = {qq, x.p};
  return s;
}

struct CovariancePrediction {
  Eigen::Matrix2d V_inv;
  Eigen::Matrix2d V;
  Eigen::Vector2d eigenvalues; // of V, ascending
  PhasePoint center;
};

/// V⁻¹ = 2/[(|σ|²+1)²+δ²] · [[|σ|²+1+δ², -|σ|²δ], [-|σ|²δ, |σ|²(|σ|²+1)]].
inline CovariancePrediction covariance_prediction(const SqueezeParams& s, PhasePoint center = {}) {
  const double s2 = std::norm(s.sigma);
  const double d = s.delta;
  const double den = (s2 + 1.0) * (s2 + 1.0) + d * d;
  CovariancePrediction out;
  out.V_inv << s2 + 1.0 + d * d, -s2 * d, -s2 * d, s2 * (s2 + 1.0);
  out.V_inv *= 2.0 / den;
  const double expected = 4.0 * s2 / den;
  const double det = out.V_inv.determinant();
  if (!(std::abs(det - expected) <= 1e-10 * std::abs(expected))) {
    throw NumericalSingularity("det(V^-1) = " + std::to_string(det) + ", expected " + std::to_string(expected));
  }
  out.V = out.V_inv.inverse();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(out.V);
  out.eigenvalues = es.eigenvalues();
  out.center = center;
  return out;
}

/// Jacobian of q' = q + g'(p), p' = p - f'(q') at x.
inline Eigen::Matrix2d forward_jacobian(const ClassicalMapSpec& map, PhasePoint x) {
  const auto& k = require_kick(map);
  const double g2 = k.g2(x.p);
  const double f2 = k.f2(x.q + k.g1(x.p));
  Eigen::Matrix2d J;
  J << 1.0, g2, -f2, 1.0 - f2 * g2;
  return J;
}

/// Jacobian of the inverse step p = p' + f'(q'), q = q' - g'(p) at x.
inline Eigen::Matrix2d inverse_jacobian(const ClassicalMapSpec& map, PhasePoint x) {
  const auto& k = require_kick(map);
  const double f2 = k.f2(x.q);
  const double g2 = k.g2(x.p + k.f1(x.q));
  Eigen::Matrix2d J;
  J << 1.0 - g2 * f2, -g2, f2, 1.0;
  return J;
}

struct GaussianMoments {
  Eigen::Vector2d mean;
  Eigen::Matrix2d covariance;
  double mass = 0.0;
};

/// Moments of a nonnegative field. On the torus, displacements are taken
/// relative to `reference` and wrapped into [-1/2, 1/2).
inline GaussianMoments fit_moments(const classical::PhaseSpaceField& f, PhasePoint reference) {
  const auto& g = f.geometry;
  const bool torus = g.kind == classical::GeometryKind::torus;
  auto disp = [torus](double x, double ref) {
    double d = x - ref;
    if (torus) d -= std::floor(d + 0.5);
    return d;
  };
  double m0 = 0.0;
  Eigen::Vector2d m1 = Eigen::Vector2d::Zero();
  Eigen::Matrix2d m2 = Eigen::Matrix2d::Zero();
  for (int i = 0; i < g.M; ++i) {
    const double dq = disp(g.q(i), reference.q);
    for (int j = 0; j < g.M; ++j) {
      const double dp = disp(g.p(j), reference.p);
      const double w = f(i, j);
      m0 += w;
      m1 += w * Eigen::Vector2d(dq, dp);
      m2(0, 0) += w * dq * dq;
      m2(0, 1) += w * dq * dp;
      m2(1, 1) += w * dp * dp;
    }
  }
  m2(1, 0) = m2(0, 1);
  GaussianMoments out;
  out.mass = m0 * g.cell_area();
  const Eigen::Vector2d mu = m1 / m0;
  out.covariance = m2 / m0 - mu * mu.transpose();
  out.mean = Eigen::Vector2d(reference.q, reference.p) + mu;
  if (torus) {
    out.mean(0) = classical::wrap_unit(out.mean(0));
    out.mean(1) = classical::wrap_unit(out.mean(1));
  }
  return out;
}

enum class StepDirection { forward, backward };

struct OneStepOptions {
  StepDirection direction = StepDirection::forward;
  int grid_M = 256;
  /// Plane window half-width in units of √ħ around the image point.
  double plane_halfwidth = 10.0;
};

struct OneStepReport {
  PhasePoint start;
  PhasePoint classical_image;
  double hbar = 0.0;
  classical::PhaseSpaceGeometry grid;
  GaussianMoments fit;
  double mean_offset_cells = 0.0;
  SqueezeParams squeeze;
  CovariancePrediction prediction;
  Eigen::Matrix2d target_smoothed;   // ħ(V + I)
  Eigen::Matrix2d target_b19;        // ħV
  Eigen::Matrix2d target_linearized; // ħ(JJᵀ + I)/2
  double rel_error_smoothed = 0.0;
  double rel_error_b19 = 0.0;
  double rel_error_linearized = 0.0;
  double l1_distance = 0.0;
  classical::PhaseSpaceField evolved_husimi;
  classical::PhaseSpaceField pulled_back_husimi;

  std::string to_text() const {
    std::ostringstream os;
    os.precision(10);
    auto mat = [&](const char* key, const Eigen::Matrix2d& m) {
      os << key << " = " << m(0, 0) << ' ' << m(0, 1) << ' ' << m(1, 0) << ' ' << m(1, 1) << '\n';
    };
    os << "start = " << start.q << ' ' << start.p << '\n';
    os << "classical_image = " << classical_image.q << ' ' << classical_image.p << '\n';
    os << "hbar = " << hbar << '\n';
    os << "grid_M = " << grid.M << '\n';
    os << "husimi_mass = " << fit.mass << '\n';
    os << "fitted_mean = " << fit.mean(0) << ' ' << fit.mean(1) << '\n';
    os << "mean_offset_cells = " << mean_offset_cells << '\n';
    mat("fitted_covariance", fit.covariance);
    os << "squeeze_sigma = " << squeeze.sigma.real() << ' ' << squeeze.sigma.imag() << '\n';
    os << "squeeze_delta = " << squeeze.delta << '\n';
    mat("V", prediction.V);
    mat("target_hbar_V_plus_I", target_smoothed);
    mat("target_hbar_V", target_b19);
    mat("target_linearized", target_linearized);
    os << "rel_error_hbar_V_plus_I = " << rel_error_smoothed << '\n';
    os << "rel_error_hbar_V = " << rel_error_b19 << '\n';
    os << "rel_error_linearized = " << rel_error_linearized << '\n';
    os << "l1_husimi_vs_pullback = " << l1_distance << '\n';
    return os.str();
  }
};

namespace detail {

inline double rel_frobenius(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) {
  return (a - b).norm() / b.norm();
}

inline Eigen::VectorXcd step(const quantum::QuantumSystem& s, const Eigen::VectorXcd& psi, bool adjoint) {
  if (s.U_diagonal) {
    return adjoint ? Eigen::VectorXcd(s.U_diagonal->conjugate().cwiseProduct(psi))
                   : Eigen::VectorXcd(s.U_diagonal->cwiseProduct(psi));
  }
  if (s.U.size() == 0) throw PropagatorFailure("system has no unitary");
  return adjoint ? Eigen::VectorXcd(s.U.adjoint() * psi) : Eigen::VectorXcd(s.U * psi);
}

} // namespace detail

/// Evolves the coherent state at x by one step, fits the Husimi moments and
/// compares them with the classical image and the squeezing prediction.
/// The forward check uses U and M; the backward one U† and M⁻¹ with the
/// inverse-step curvature convention.
inline OneStepReport one_step_check(const quantum::QuantumSystem& s, const ClassicalMapSpec& map,
                                    PhasePoint x, const OneStepOptions& opt = {}) {
  const bool fwd = opt.direction == StepDirection::forward;
  OneStepReport r;
  r.start = x;
  r.hbar = s.hbar;
  r.classical_image = fwd ? map.forward(x) : map.inverse(x);
  if (s.kind == quantum::SystemKind::torus) {
    r.grid = classical::PhaseSpaceGeometry::torus(opt.grid_M);
  } else {
    const double h = opt.plane_halfwidth * std::sqrt(s.hbar);
    r.grid = {classical::GeometryKind::plane, opt.grid_M,
              r.classical_image.q - h, r.classical_image.q + h,
              r.classical_image.p - h, r.classical_image.p + h};
  }

  const Eigen::VectorXcd psi0 = quantum::coherent_state(s, x);
  const Eigen::VectorXcd psi1 = detail::step(s, psi0, !fwd);
  r.evolved_husimi = quantum::husimi_field(s, psi1, r.grid);
  r.fit = fit_moments(r.evolved_husimi, r.classical_image);
  if (std::abs(r.fit.mass - 1.0) > 1e-3) {
    throw FitFailure("Husimi mass on the grid is " + std::to_string(r.fit.mass));
  }
  {
    double dq = r.fit.mean(0) - r.classical_image.q;
    double dp = r.fit.mean(1) - r.classical_image.p;
    if (map.periodic) {
      dq -= std::floor(dq + 0.5);
      dp -= std::floor(dp + 0.5);
    }
    r.mean_offset_cells = std::max(std::abs(dq) / r.grid.dq(), std::abs(dp) / r.grid.dp());
  }

  // Pull the initial Husimi back along one step of the classical flow.
  std::vector<PhasePoint> pulled;
  pulled.reserve(r.grid.nodes());
  for (int i = 0; i < r.grid.M; ++i) {
    for (int j = 0; j < r.grid.M; ++j) {
      const PhasePoint y{r.grid.q(i), r.grid.p(j)};
      pulled.push_back(fwd ? map.inverse(y) : map.forward(y));
    }
  }
  r.pulled_back_husimi = classical::PhaseSpaceField(
      r.grid, quantum::husimi(s, psi0, std::span<const PhasePoint>(pulled)));
  r.l1_distance = (r.evolved_husimi.values - r.pulled_back_husimi.values).cwiseAbs().sum() *
                  r.grid.cell_area();

  r.squeeze = fwd ? forward_squeeze_params(map, x) : squeeze_params(map, x);
  r.prediction = covariance_prediction(r.squeeze, r.classical_image);
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d J = fwd ? forward_jacobian(map, x) : inverse_jacobian(map, x);
  r.target_smoothed = s.hbar * (r.prediction.V + I);
  r.target_b19 = s.hbar * r.prediction.V;
  r.target_linearized = 0.5 * s.hbar * (J * J.transpose() + I);
  r.rel_error_smoothed = detail::rel_frobenius(r.fit.covariance, r.target_smoothed);
  r.rel_error_b19 = detail::rel_frobenius(r.fit.covariance, r.target_b19);
  r.rel_error_linearized = detail::rel_frobenius(r.fit.covariance, r.target_linearized);
  return r;
}

enum class Stability { stable, unstable };

/// Ehrenfest time scale: C/√ħ for stable orbits, C|log ħ|/rate otherwise.
inline double ehrenfest_estimate(double hbar, Stability stability, double rate = 1.0, double C = 1.0) {
  if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
  if (stability == Stability::stable) return C / std::sqrt(hbar);
  if (!(rate > 0.0)) throw ConfigError("Lyapunov rate must be positive");
  return C * std::abs(std::log(hbar)) / rate;
}

} // namespace kcorr::semiclassics
