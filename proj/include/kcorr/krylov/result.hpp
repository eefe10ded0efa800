#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

#include "kcorr/krylov/space.hpp"
#include "kcorr/krylov/store.hpp"

namespace kcorr::krylov {

/// Knobs shared by both build paths.
struct BuildOptions {
  /// Number of new Krylov vectors requested; the basis holds at most
  /// max_steps + 1 vectors and β is tabulated for t = 0..max_steps.
  std::size_t max_steps = 1;
  /// Arnoldi stops when b_n <= tol; Gram-Schmidt when the residual of ρ_n
  /// drops below tol·‖ρ_n‖.
  double tol = 1e-8;
  StorageOptions storage{};
};

/// Everything a Krylov build produces. Sequences are indexed by n = 0..K-1
/// with b[0] = 0 by convention (κ₀ has no lower neighbour).
template <class V>
struct KrylovResult {
  BasisStore<V> basis;
  double rho0_norm = 0.0;

  std::vector<cplx> a;
  std::vector<cplx> b;
  std::vector<cplx> c;
  /// Residual norm left after orthogonalizing Uκ_{K-1}; b_K if it existed.
  double b_next = 0.0;

  /// (κ_m|Uκ_n) as evaluated during the build, K×K.
  Eigen::MatrixXcd hessenberg_direct;
  /// α(t, n): κ_n = Σ_t α_tn ρ_t, upper triangular in (t, n).
  Eigen::MatrixXcd alpha;
  /// β(n, t) = (κ_n|ρ_t)/‖ρ₀‖ for t = 0..max_steps.
  Eigen::MatrixXcd beta;
  std::vector<double> complexity;
  /// Largest |Σ_n|β_nt|² - 1| seen before renormalization.
  double norm_drift = 0.0;

  std::optional<std::size_t> terminated_at;
  bool linear_dependence = false;

  std::size_t size() const { return a.size(); }
};

/// C_K(t) = Σ_n n|β_nt|², each column renormalized to unit weight first.
/// Returns the maximal drift of the column norms through `drift` if given.
inline std::vector<double> krylov_complexity(const Eigen::MatrixXcd& beta,
                                             double* drift = nullptr) {
  std::vector<double> out(static_cast<std::size_t>(beta.cols()), 0.0);
  double worst = 0.0;
  for (Eigen::Index t = 0; t < beta.cols(); ++t) {
    double total = 0.0;
    double weighted = 0.0;
    for (Eigen::Index n = 0; n < beta.rows(); ++n) {
      const double w = std::norm(beta(n, t));
      total += w;
      weighted += static_cast<double>(n) * w;
    }
    worst = std::max(worst, std::abs(total - 1.0));
    out[static_cast<std::size_t>(t)] = total > 0.0 ? weighted / total : 0.0;
  }
  if (drift) *drift = worst;
  return out;
}

namespace detail {

template <class V>
void fill_sequences(KrylovResult<V>& r) {
  const auto K = r.hessenberg_direct.rows();
  r.a.assign(static_cast<std::size_t>(K), cplx{});
  r.b.assign(static_cast<std::size_t>(K), cplx{});
  r.c.assign(static_cast<std::size_t>(K), cplx{});
  for (Eigen::Index n = 0; n < K; ++n) {
    r.a[n] = r.hessenberg_direct(n, n);
    r.c[n] = r.hessenberg_direct(0, n);
    if (n > 0) r.b[n] = r.hessenberg_direct(n, n - 1);
  }
}

} // namespace detail

} // namespace kcorr::krylov
