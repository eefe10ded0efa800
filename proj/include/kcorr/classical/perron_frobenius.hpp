#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "kcorr/classical/field.hpp"
#include "kcorr/classical/geometry.hpp"
#include "kcorr/classical/maps.hpp"
#include "kcorr/errors.hpp"

namespace kcorr::classical {

/// Normalized Gaussian of width σ. On the torus it is periodized with the
/// lattice sum truncated at |n|, |m| <= J; the sum factorizes in q and p.
struct GaussianDistribution {
  PhasePoint center;
  double sigma = 0.1;
  bool periodic = false;
  int J = 3;

  double operator()(double q, double p) const {
    const double norm = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);
    if (!periodic) return norm * factor(q - center.q) * factor(p - center.p);
    return norm * lattice(q - center.q) * lattice(p - center.p);
  }

  double operator()(PhasePoint x) const { return (*this)(x.q, x.p); }

private:
  double factor(double d) const { return std::exp(-d * d / (2.0 * sigma * sigma)); }
  double lattice(double d) const {
    double s = 0.0;
    for (int n = -J; n <= J; ++n) s += factor(d - n);
    return s;
  }
};

/// Number of periodic images needed so that discarded terms are below
/// 1e-16 relative; never fewer than 3.
inline int lattice_cutoff(double sigma) {
  int J = 3;
  while (std::exp(-(J - 0.5) * (J - 0.5) / (2.0 * sigma * sigma)) > 1e-16) ++J;
  return J;
}

inline GaussianDistribution gaussian_initial(PhasePoint center, double sigma,
                                             const PhaseSpaceGeometry& geometry) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  geometry.check_resolution(sigma);
  GaussianDistribution g;
  g.center = center;
  g.sigma = sigma;
  g.periodic = geometry.kind == GeometryKind::torus;
  g.J = lattice_cutoff(sigma);
  return g;
}

/// Grid nodes pulled back t steps, y = M^{-t}(x), together with the
/// closed-form ρ₀. Materializing gives ρ_t(x) = ρ₀(M^{-t}x) exactly.
struct BackTrajectoryState {
  PhaseSpaceGeometry geometry;
  Eigen::ArrayXd yq;
  Eigen::ArrayXd yp;
  GaussianDistribution rho0;
  int t = 0;

  static BackTrajectoryState start(const PhaseSpaceGeometry& g, const GaussianDistribution& rho0) {
    BackTrajectoryState s;
    s.geometry = g;
    s.rho0 = rho0;
    const auto n = static_cast<Eigen::Index>(g.nodes());
    s.yq.resize(n);
    s.yp.resize(n);
    for (int i = 0; i < g.M; ++i) {
      for (int j = 0; j < g.M; ++j) {
        const auto k = static_cast<Eigen::Index>(g.index(i, j));
        s.yq(k) = g.q(i);
        s.yp(k) = g.p(j);
      }
    }
    return s;
  }

  PhaseSpaceField materialize() const {
    Eigen::VectorXd v(yq.size());
    for (Eigen::Index k = 0; k < yq.size(); ++k) v(k) = rho0(yq(k), yp(k));
    return PhaseSpaceField(geometry, std::move(v));
  }
};

/// One Perron-Frobenius step: every back-trajectory advances by M^{-1}.
inline BackTrajectoryState pf_evolve(BackTrajectoryState s, const ClassicalMapSpec& map) {
  for (Eigen::Index k = 0; k < s.yq.size(); ++k) {
    const PhasePoint y = map.inverse({s.yq(k), s.yp(k)});
    s.yq(k) = y.q;
    s.yp(k) = y.p;
  }
  ++s.t;
  return s;
}

} // namespace kcorr::classical
