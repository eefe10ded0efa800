#pragma once

#include <Eigen/Dense>

#include <concepts>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kcorr/errors.hpp"
#include "kcorr/krylov/analysis.hpp"
#include "kcorr/krylov/result.hpp"
#include "kcorr/krylov/space.hpp"
#include "kcorr/krylov/store.hpp"

namespace kcorr::krylov {

namespace detail {

/// Two classical Gram-Schmidt sweeps of w against the stored basis. The
/// accumulated projection coefficients are returned.
template <InnerProductSpace S, class V = typename S::vector_type>
Eigen::VectorXcd orthogonalize_twice(const S& space, const BasisStore<V>& basis, V& w) {
  const auto K = static_cast<Eigen::Index>(basis.size());
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(K);
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < K; ++j) {
      basis.visit(static_cast<std::size_t>(j), [&](const V& kappa) {
        const cplx z = space.inner(kappa, w);
        space.axpy(-z, kappa, w);
        h(j) += z;
      });
    }
  }
  return h;
}

template <class V>
void finish(KrylovResult<V>& r) {
  fill_sequences(r);
  r.complexity = krylov_complexity(r.beta, &r.norm_drift);
}

} // namespace detail

/// Arnoldi iteration with the orthogonalization sum applied twice per step.
/// The wavefunction is propagated with the directly evaluated Hessenberg
/// matrix, which is exact for t <= max_steps.
template <KrylovVectorSpace S, class V = typename S::vector_type>
KrylovResult<V> arnoldi_build(const S& space, const V& rho0, const BuildOptions& opts) {
  if (opts.max_steps < 1) throw ConfigError("max_steps must be at least 1");
  KrylovResult<V> r;
  r.rho0_norm = norm(space, rho0);
  if (!(r.rho0_norm > opts.tol)) {
    throw ZeroInitialVector("initial vector norm " + std::to_string(r.rho0_norm));
  }
  r.basis = BasisStore<V>(space, opts.storage);
  {
    V k0 = rho0;
    space.scale(1.0 / r.rho0_norm, k0);
    r.basis.push_back(std::move(k0));
  }

  const auto cap = static_cast<Eigen::Index>(opts.max_steps) + 1;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(cap, cap);
  for (std::size_t n = 0;; ++n) {
    V w = r.basis.visit(n, [&](const V& kappa) { return V(space.apply(kappa)); });
    const Eigen::VectorXcd h = detail::orthogonalize_twice(space, r.basis, w);
    const auto ni = static_cast<Eigen::Index>(n);
    H.col(ni).head(h.size()) = h;
    const double bn = norm(space, w);
    r.b_next = bn;
    if (n == opts.max_steps) break;
    if (bn <= opts.tol) {
      r.terminated_at = n + 1;
      break;
    }
    H(ni + 1, ni) = bn;
    space.scale(1.0 / bn, w);
    r.basis.push_back(std::move(w));
  }
  const auto K = static_cast<Eigen::Index>(r.basis.size());
  r.hessenberg_direct = H.topLeftCorner(K, K);

  // κ_{n+1} b_{n+1} = Uκ_n - Σ_j H_jn κ_j with Uκ_n = Σ_t α_tn ρ_{t+1}.
  r.alpha = Eigen::MatrixXcd::Zero(K, K);
  r.alpha(0, 0) = 1.0 / r.rho0_norm;
  for (Eigen::Index n = 0; n + 1 < K; ++n) {
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(K);
    next.segment(1, n + 1) = r.alpha.col(n).head(n + 1);
    next -= r.alpha.leftCols(n + 1) * r.hessenberg_direct.col(n).head(n + 1);
    r.alpha.col(n + 1) = next / r.hessenberg_direct(n + 1, n);
  }

  const auto T = cap;
  r.beta = Eigen::MatrixXcd::Zero(K, T);
  r.beta(0, 0) = 1.0;
  for (Eigen::Index t = 0; t + 1 < T; ++t) {
    r.beta.col(t + 1) = r.hessenberg_direct * r.beta.col(t);
  }
  detail::finish(r);
  return r;
}

/// Gram-Schmidt construction from a time series ρ_0..ρ_S produced on demand
/// by `snapshot(t)` (called once per t, in order). The basis is built from
/// ρ_0..ρ_{S-1}; ρ_S only enters the last Hessenberg column.
template <InnerProductSpace S, class V = typename S::vector_type, class Gen>
  requires std::invocable<Gen&, std::size_t>
KrylovResult<V> gram_schmidt_build(const S& space, std::size_t count, Gen&& snapshot,
                                   const BuildOptions& opts) {
  if (count < 2) throw ConfigError("gram_schmidt_build needs at least two snapshots");
  const auto Scount = static_cast<Eigen::Index>(count) - 1; // ρ_0..ρ_{S-1} form the basis
  KrylovResult<V> r;
  r.basis = BasisStore<V>(space, opts.storage);
  double last_residual = 0.0;

  // R(j, t) = (κ_j|ρ_t) for t = 0..S.
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(Scount, Scount + 1);
  for (Eigen::Index t = 0; t <= Scount; ++t) {
    V w = snapshot(static_cast<std::size_t>(t));
    const double wnorm = norm(space, w);
    if (t == 0) {
      r.rho0_norm = wnorm;
      if (!(wnorm > opts.tol)) throw ZeroInitialVector("initial snapshot norm " + std::to_string(wnorm));
    }
    const Eigen::VectorXcd h = detail::orthogonalize_twice(space, r.basis, w);
    R.col(t).head(h.size()) = h;
    if (r.linear_dependence) continue;
    const double res = norm(space, w);
    if (t == Scount) {
      last_residual = res;
      continue;
    }
    if (res <= opts.tol * wnorm) {
      r.linear_dependence = true;
      r.terminated_at = static_cast<std::size_t>(t);
      continue;
    }
    R(t, t) = res;
    space.scale(1.0 / res, w);
    r.basis.push_back(std::move(w));
  }

  const auto K = static_cast<Eigen::Index>(r.basis.size());
  const Eigen::MatrixXcd Rk = R.topLeftCorner(K, K);
  r.alpha = Rk.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXcd::Identity(K, K));
  r.alpha.template triangularView<Eigen::StrictlyLower>().setZero();

  const Eigen::MatrixXcd beta_ext = R.topRows(K) / r.rho0_norm;
  r.beta = beta_ext.leftCols(Scount);
  // (κ_m|Uκ_n) = Σ_t α_tn (κ_m|ρ_{t+1}).
  r.hessenberg_direct = r.rho0_norm * beta_ext.middleCols(1, K) * r.alpha;
  // Only ρ_S reaches outside the basis, with weight α_{K-1,K-1}.
  r.b_next = r.linear_dependence ? 0.0 : std::abs(r.alpha(K - 1, K - 1)) * last_residual;
  detail::finish(r);
  return r;
}

template <InnerProductSpace S, class V = typename S::vector_type>
KrylovResult<V> gram_schmidt_build(const S& space, const std::vector<V>& snapshots,
                                   const BuildOptions& opts) {
  return gram_schmidt_build(space, snapshots.size(),
                            [&](std::size_t t) -> V { return snapshots[t]; }, opts);
}

} // namespace kcorr::krylov
