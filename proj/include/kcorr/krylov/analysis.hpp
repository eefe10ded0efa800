#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "kcorr/errors.hpp"
#include "kcorr/krylov/result.hpp"

namespace kcorr::krylov {

/// Below this |c_m| the rank-1 reconstruction of row m is not attempted.
inline constexpr double kHessenbergGuard = 1e-12;

struct HessenbergMatrix {
  Eigen::MatrixXcd values;
  /// Entries (m, n) that could not be reconstructed and were zero-filled.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> guarded;
};

/// Upper Hessenberg propagator rebuilt from the Arnoldi sequences alone:
/// U_{n+1,n} = b_{n+1} and U_mn = (a_m/c_m)·c_n for m <= n. Rows with a
/// vanishing c_m take `direct` values when supplied, otherwise they are
/// zero-filled off the diagonal and reported.
inline HessenbergMatrix hessenberg_matrix(std::span<const cplx> a, std::span<const cplx> b,
                                          std::span<const cplx> c,
                                          const Eigen::MatrixXcd* direct = nullptr) {
  const auto K = static_cast<Eigen::Index>(a.size());
  if (b.size() != a.size() || c.size() != a.size()) {
    throw IndexOutOfRange("sequence lengths differ");
  }
  if (direct && (direct->rows() < K || direct->cols() < K)) {
    throw IndexOutOfRange("direct Hessenberg matrix is smaller than the sequences");
  }
  HessenbergMatrix h;
  h.values = Eigen::MatrixXcd::Zero(K, K);
  for (Eigen::Index n = 1; n < K; ++n) h.values(n, n - 1) = b[n];
  for (Eigen::Index m = 0; m < K; ++m) {
    h.values(m, m) = a[m];
    const bool ok = std::abs(c[m]) >= kHessenbergGuard;
    for (Eigen::Index n = m + 1; n < K; ++n) {
      if (ok) {
        h.values(m, n) = a[m] / c[m] * c[n];
      } else if (direct) {
        h.values(m, n) = (*direct)(m, n);
      } else {
        h.guarded.emplace_back(m, n);
      }
    }
  }
  return h;
}

template <class V>
HessenbergMatrix hessenberg_matrix(const KrylovResult<V>& r) {
  const Eigen::MatrixXcd* direct = r.hessenberg_direct.size() ? &r.hessenberg_direct : nullptr;
  return hessenberg_matrix(r.a, r.b, r.c, direct);
}

/// β(n, t) = (κ_n|ρ_t)/‖ρ₀‖ by direct projection of the snapshots.
template <InnerProductSpace S, class V = typename S::vector_type>
Eigen::MatrixXcd krylov_wavefunction(const S& space, const KrylovResult<V>& r,
                                     const std::vector<V>& snapshots) {
  const auto K = static_cast<Eigen::Index>(r.basis.size());
  Eigen::MatrixXcd beta(K, static_cast<Eigen::Index>(snapshots.size()));
  for (Eigen::Index n = 0; n < K; ++n) {
    r.basis.visit(static_cast<std::size_t>(n), [&](const V& kappa) {
      for (std::size_t t = 0; t < snapshots.size(); ++t) {
        beta(n, static_cast<Eigen::Index>(t)) = cplx(space.inner(kappa, snapshots[t])) / r.rho0_norm;
      }
    });
  }
  return beta;
}

/// One hop of the Krylov wavefunction along the chain, read off the
/// Hessenberg row: β_{n,t+1} = b_n β_{n-1,t} + (a_n/c_n) Σ_{m>=n} c_m β_{m,t}.
/// Rows whose c_n vanishes keep only the diagonal a_n β_{n,t} term.
inline Eigen::VectorXcd hop_evolve(const Eigen::VectorXcd& beta_t, std::span<const cplx> a,
                                   std::span<const cplx> b, std::span<const cplx> c) {
  const auto K = beta_t.size();
  if (static_cast<Eigen::Index>(a.size()) < K || static_cast<Eigen::Index>(b.size()) < K ||
      static_cast<Eigen::Index>(c.size()) < K) {
    throw IndexOutOfRange("sequences shorter than the wavefunction (" + std::to_string(K) + ")");
  }
  Eigen::VectorXcd out(K);
  cplx tail = 0.0;
  for (Eigen::Index n = K - 1; n >= 0; --n) {
    tail += c[n] * beta_t(n);
    cplx v = n > 0 ? b[n] * beta_t(n - 1) : cplx{};
    if (std::abs(c[n]) >= kHessenbergGuard) {
      v += a[n] / c[n] * tail;
    } else {
      v += a[n] * beta_t(n);
    }
    out(n) = v;
  }
  return out;
}

/// Same step using an explicit Hessenberg matrix.
inline Eigen::VectorXcd hop_evolve(const Eigen::VectorXcd& beta_t, const Eigen::MatrixXcd& H) {
  if (H.cols() != beta_t.size()) throw IndexOutOfRange("Hessenberg matrix size mismatch");
  return H * beta_t;
}

/// Runs hop_evolve from β(·,0) = e₀ for `steps` steps and returns the
/// table. Past the last basis vector the chain must have terminated.
template <class V>
Eigen::MatrixXcd hop_trajectory(const KrylovResult<V>& r, std::size_t steps) {
  const auto K = static_cast<Eigen::Index>(r.size());
  if (!r.terminated_at && steps + 1 > static_cast<std::size_t>(K)) {
    throw IndexOutOfRange("basis of size " + std::to_string(K) + " cannot propagate " +
                          std::to_string(steps) + " steps");
  }
  Eigen::MatrixXcd beta = Eigen::MatrixXcd::Zero(K, static_cast<Eigen::Index>(steps) + 1);
  beta(0, 0) = 1.0;
  for (std::size_t t = 0; t < steps; ++t) {
    beta.col(static_cast<Eigen::Index>(t) + 1) =
        hop_evolve(beta.col(static_cast<Eigen::Index>(t)), r.a, r.b, r.c);
  }
  return beta;
}

} // namespace kcorr::krylov
