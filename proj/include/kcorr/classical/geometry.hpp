#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "kcorr/errors.hpp"

namespace kcorr::classical {

enum class GeometryKind { plane, torus };

inline const char* to_string(GeometryKind k) { return k == GeometryKind::plane ? "plane" : "torus"; }

/// Rectangular M×M grid of cell midpoints. Node (i, j) sits at
/// (q_i, p_j) and is stored at index i·M + j (q-major).
struct PhaseSpaceGeometry {
  GeometryKind kind = GeometryKind::torus;
  int M = 2;
  double qlo = 0.0, qhi = 1.0, plo = 0.0, phi = 1.0;

  static PhaseSpaceGeometry torus(int M) {
    check_M(M);
    return {GeometryKind::torus, M, 0.0, 1.0, 0.0, 1.0};
  }

  /// Square window [-L, L]².
  static PhaseSpaceGeometry plane(double L, int M) {
    check_M(M);
    if (!(L > 0.0)) throw ConfigError("plane window half-width must be positive");
    return {GeometryKind::plane, M, -L, L, -L, L};
  }

  /// Window covering the orbit of a Gaussian centred at (q0, p0) around the
  /// origin, L = √(q0²+p0²) + 8σ, and the smallest even M with Δ <= σ/8.
  static PhaseSpaceGeometry plane_for(double q0, double p0, double sigma) {
    const double L = std::hypot(q0, p0) + 8.0 * sigma;
    int M = static_cast<int>(std::ceil(2.0 * L / (sigma / 8.0) - 1e-9));
    M += M % 2;
    return plane(L, std::max(M, 2));
  }

  std::size_t nodes() const { return static_cast<std::size_t>(M) * static_cast<std::size_t>(M); }
  double dq() const { return (qhi - qlo) / M; }
  double dp() const { return (phi - plo) / M; }
  double cell_area() const { return dq() * dp(); }
  double q(int i) const { return qlo + (i + 0.5) * dq(); }
  double p(int j) const { return plo + (j + 0.5) * dp(); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(M) + static_cast<std::size_t>(j);
  }

  /// Throws ResolutionError unless the cell side resolves σ/8.
  void check_resolution(double sigma) const {
    const double delta = std::max(dq(), dp());
    if (delta > sigma / 8.0 * (1.0 + 1e-12)) {
      throw ResolutionError("grid spacing " + std::to_string(delta) + " exceeds sigma/8 = " +
                            std::to_string(sigma / 8.0));
    }
  }

  bool operator==(const PhaseSpaceGeometry&) const = default;

private:
  static void check_M(int M) {
    if (M < 2) throw ConfigError("grid resolution M must be at least 2");
  }
};

} // namespace kcorr::classical
