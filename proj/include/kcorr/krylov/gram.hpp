#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kcorr/errors.hpp"
#include "kcorr/krylov/space.hpp"

namespace kcorr::krylov {

/// Leading determinants whose Hadamard ratio D_k / Π G_ii falls below this
/// are treated as singular.
inline constexpr double kGramSingularRatio = 1e-13;

/// Gram matrix G_ij = (ρ_i|ρ_j) of a snapshot series with its determinant
/// helpers. Indices follow the snapshots: G_n is the leading (n+1)×(n+1)
/// block and D_n its determinant, with D_{-1} = 1.
class GramData {
public:
  GramData() = default;
  explicit GramData(Eigen::MatrixXcd gram) : G_(std::move(gram)) {
    if (G_.rows() != G_.cols()) throw IndexOutOfRange("Gram matrix must be square");
  }

  /// Hermitian Toeplitz matrix from correlations c_j = (ρ_0|ρ_j), valid for
  /// norm-preserving propagators where (ρ_i|ρ_j) depends on j - i only.
  static GramData from_correlations(const std::vector<cplx>& c) {
    const auto n = static_cast<Eigen::Index>(c.size());
    Eigen::MatrixXcd G(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        G(i, j) = j >= i ? c[static_cast<std::size_t>(j - i)] : std::conj(c[static_cast<std::size_t>(i - j)]);
      }
    }
    return GramData(std::move(G));
  }

  template <InnerProductSpace S>
  static GramData from_snapshots(const S& space, const std::vector<typename S::vector_type>& rho) {
    const auto n = static_cast<Eigen::Index>(rho.size());
    Eigen::MatrixXcd G(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        G(i, j) = space.inner(rho[static_cast<std::size_t>(i)], rho[static_cast<std::size_t>(j)]);
        G(j, i) = std::conj(G(i, j));
      }
    }
    return GramData(std::move(G));
  }

  Eigen::Index size() const { return G_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return G_; }
  auto leading(Eigen::Index n) const { return G_.topLeftCorner(n + 1, n + 1); }

  /// D_n = det G_n; D_{-1} = 1.
  double determinant(Eigen::Index n) const {
    if (n < 0) return 1.0;
    check(n);
    return std::real(Eigen::MatrixXcd(leading(n)).determinant());
  }

  /// D^{(t)}_{n-1}: rows 0..n-1 of G_n with column t deleted.
  cplx minor(Eigen::Index t, Eigen::Index n) const {
    check(n);
    if (t < 0 || t > n) throw IndexOutOfRange("minor column " + std::to_string(t));
    if (n == 0) return 1.0;
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index j = 0, col = 0; j <= n; ++j) {
      if (j == t) continue;
      m.col(col++) = G_.col(j).head(n);
    }
    return m.determinant();
  }

  /// Throws SingularGram unless D_0..D_n are all numerically positive.
  void require_positive(Eigen::Index n) const {
    double hadamard = 1.0;
    for (Eigen::Index k = 0; k <= n; ++k) {
      hadamard *= std::real(G_(k, k));
      const double d = determinant(k);
      if (!(d > 0.0) || !(d > kGramSingularRatio * hadamard)) {
        throw SingularGram("D_" + std::to_string(k) + " = " + std::to_string(d));
      }
    }
  }

private:
  void check(Eigen::Index n) const {
    if (n < 0 || n >= G_.rows()) throw IndexOutOfRange("Gram index " + std::to_string(n));
  }

  Eigen::MatrixXcd G_;
};

struct GramCoefficients {
  /// α_tn for t = 0..n.
  Eigen::VectorXcd alpha;
  /// B_n = √(D_n / D_{n-1}).
  double B = 0.0;
};

/// κ_n = Σ_t α_tn ρ_t with α_tn = (-1)^{t+n} D^{(t)}_{n-1} / √(D_n D_{n-1}),
/// the Laplace expansion of the Gram-Schmidt determinant.
inline GramCoefficients gram_determinant_coefficients(const GramData& gram, Eigen::Index n) {
  gram.require_positive(n);
  const double Dn = gram.determinant(n);
  const double Dm = gram.determinant(n - 1);
  const double scale = 1.0 / std::sqrt(Dn * Dm);
  GramCoefficients out;
  out.alpha.resize(n + 1);
  for (Eigen::Index t = 0; t <= n; ++t) {
    const double sign = ((t + n) % 2 == 0) ? 1.0 : -1.0;
    out.alpha(t) = sign * gram.minor(t, n) * scale;
  }
  out.B = std::sqrt(Dn / Dm);
  return out;
}

/// Full α table (t, n) for n = 0..K-1.
inline Eigen::MatrixXcd gram_alpha_table(const GramData& gram, Eigen::Index K) {
  Eigen::MatrixXcd alpha = Eigen::MatrixXcd::Zero(K, K);
  for (Eigen::Index n = 0; n < K; ++n) {
    alpha.col(n).head(n + 1) = gram_determinant_coefficients(gram, n).alpha;
  }
  return alpha;
}

/// β_nt = Σ_s conj(α_sn) G_st / ‖ρ₀‖, the wavefunction from correlations
/// alone. Rows n = 0..K-1, columns t = 0..size-1.
inline Eigen::MatrixXcd gram_beta_table(const GramData& gram, Eigen::Index K) {
  const Eigen::MatrixXcd alpha = gram_alpha_table(gram, K);
  const double rho0 = std::sqrt(std::real(gram.matrix()(0, 0)));
  return alpha.adjoint() * gram.matrix().topRows(K) / rho0;
}

} // namespace kcorr::krylov
