#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <variant>

#include "kcorr/errors.hpp"
#include "kcorr/krylov/space.hpp"
#include "kcorr/quantum/density.hpp"
#include "kcorr/quantum/system.hpp"

namespace kcorr::quantum {

enum class QuantumMode { liouville_density, pure_density, ket };

inline std::string to_string(QuantumMode m) {
  switch (m) {
    case QuantumMode::liouville_density: return "quantum-liouville";
    case QuantumMode::pure_density: return "quantum-pure";
    case QuantumMode::ket: return "quantum-ket";
  }
  return "?";
}

namespace detail {

inline void write_matrix(const Eigen::MatrixXcd& m, std::ostream& os) {
  const std::int64_t dims[2] = {m.rows(), m.cols()};
  krylov::detail::write_raw(os, dims, sizeof dims);
  krylov::detail::write_raw(os, m.data(), static_cast<std::size_t>(m.size()) * sizeof(cplx));
}

inline Eigen::MatrixXcd read_matrix(std::istream& is) {
  std::int64_t dims[2] = {0, 0};
  krylov::detail::read_raw(is, dims, sizeof dims);
  Eigen::MatrixXcd m(dims[0], dims[1]);
  krylov::detail::read_raw(is, m.data(), static_cast<std::size_t>(m.size()) * sizeof(cplx));
  return m;
}

} // namespace detail

/// Operators with (ρ̂|σ̂) = Tr(ρ̂†σ̂)/(2πħ), propagated by conjugation.
class OperatorSpace {
public:
  using vector_type = Eigen::MatrixXcd;

  explicit OperatorSpace(std::shared_ptr<const QuantumSystem> s) : sys_(std::move(s)) {
    if (!sys_->has_unitary()) throw PropagatorFailure("operator space needs a unitary");
  }

  cplx inner(const vector_type& u, const vector_type& v) const { return op_inner(u, v, sys_->hbar); }
  void axpy(cplx z, const vector_type& u, vector_type& w) const { w.noalias() += z * u; }
  void scale(cplx z, vector_type& w) const { w *= z; }
  vector_type apply(const vector_type& u) const { return conjugate(*sys_, u); }

  std::size_t footprint(const vector_type& u) const {
    return static_cast<std::size_t>(u.size()) * sizeof(cplx);
  }
  void write(const vector_type& u, std::ostream& os) const { detail::write_matrix(u, os); }
  vector_type read(std::istream& is) const { return detail::read_matrix(is); }

  const QuantumSystem& system() const { return *sys_; }

private:
  std::shared_ptr<const QuantumSystem> sys_;
};

/// Kets with the Hermitian inner product, propagated by ψ → Uψ.
class KetSpace {
public:
  using vector_type = Eigen::VectorXcd;

  explicit KetSpace(std::shared_ptr<const QuantumSystem> s) : sys_(std::move(s)) {
    if (!sys_->has_unitary()) throw PropagatorFailure("ket space needs a unitary");
  }

  cplx inner(const vector_type& u, const vector_type& v) const { return u.dot(v); }
  void axpy(cplx z, const vector_type& u, vector_type& w) const { w.noalias() += z * u; }
  void scale(cplx z, vector_type& w) const { w *= z; }
  vector_type apply(const vector_type& u) const {
    if (u.size() != sys_->dim) throw PropagatorFailure("ket dimension differs from system");
    if (sys_->U_diagonal) return sys_->U_diagonal->cwiseProduct(u);
    return sys_->U * u;
  }

  std::size_t footprint(const vector_type& u) const {
    return static_cast<std::size_t>(u.size()) * sizeof(cplx);
  }
  void write(const vector_type& u, std::ostream& os) const { detail::write_matrix(u, os); }
  vector_type read(std::istream& is) const { return detail::read_matrix(is); }

  const QuantumSystem& system() const { return *sys_; }

private:
  std::shared_ptr<const QuantumSystem> sys_;
};

/// The Krylov space wired for a mode: both density modes use operators,
/// ket mode uses state vectors.
using QuantumKrylovSpace = std::variant<OperatorSpace, KetSpace>;

inline QuantumKrylovSpace quantum_krylov_space(std::shared_ptr<const QuantumSystem> s, QuantumMode mode) {
  if (mode == QuantumMode::ket) return KetSpace(std::move(s));
  return OperatorSpace(std::move(s));
}

} // namespace kcorr::quantum
