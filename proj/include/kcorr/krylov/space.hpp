#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <utility>

#include "kcorr/errors.hpp"

namespace kcorr::krylov {

using cplx = std::complex<double>;

/// A space with a sesquilinear inner product (conjugate-linear in the first
/// argument) and in-place linear updates. This is all Gram-Schmidt needs.
template <class S>
concept InnerProductSpace =
    requires(const S& s, const typename S::vector_type& u,
             typename S::vector_type& w, cplx z) {
      typename S::vector_type;
      { s.inner(u, u) } -> std::convertible_to<cplx>;
      s.axpy(z, u, w); // w += z * u
      s.scale(z, w);   // w *= z
    };

/// An inner-product space that also carries a one-step propagator.
template <class S>
concept KrylovVectorSpace =
    InnerProductSpace<S> && requires(const S& s, const typename S::vector_type& u) {
      { s.apply(u) } -> std::convertible_to<typename S::vector_type>;
    };

/// Spaces whose vectors can be spilled to disk.
template <class S>
concept SerializableSpace =
    InnerProductSpace<S> &&
    requires(const S& s, const typename S::vector_type& u, std::ostream& os,
             std::istream& is) {
      s.write(u, os);
      { s.read(is) } -> std::same_as<typename S::vector_type>;
    };

template <class S>
concept SizedSpace = InnerProductSpace<S> &&
                     requires(const S& s, const typename S::vector_type& u) {
                       { s.footprint(u) } -> std::convertible_to<std::size_t>;
                     };

template <InnerProductSpace S>
double norm(const S& space, const typename S::vector_type& v) {
  return std::sqrt(std::max(0.0, std::real(cplx(space.inner(v, v)))));
}

template <InnerProductSpace S>
std::size_t footprint(const S& space, const typename S::vector_type& v) {
  if constexpr (SizedSpace<S>) {
    return static_cast<std::size_t>(space.footprint(v));
  } else {
    (void)space;
    (void)v;
    return sizeof(typename S::vector_type);
  }
}

/// Real-valued backends only accept real update coefficients.
inline double require_real(cplx z, const char* where) {
  const double scale = std::max(1.0, std::abs(z));
  if (std::abs(z.imag()) > 1e-10 * scale) {
    throw RealnessViolation(std::string(where) + ": coefficient has imaginary part " +
                            std::to_string(z.imag()));
  }
  return z.real();
}

namespace detail {

inline void write_raw(std::ostream& os, const void* data, std::size_t bytes) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!os) throw StorageError("failed writing vector data");
}

inline void read_raw(std::istream& is, void* data, std::size_t bytes) {
  is.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (!is) throw StorageError("failed reading vector data");
}

} // namespace detail

/// Complex column vectors with the Euclidean inner product and an explicit
/// matrix propagator. Used for synthetic dynamics and as a reference backend.
class MatrixSpace {
public:
  using vector_type = Eigen::VectorXcd;

  MatrixSpace() = default;
  explicit MatrixSpace(Eigen::MatrixXcd propagator) : propagator_(std::move(propagator)) {}

  cplx inner(const vector_type& u, const vector_type& v) const { return u.dot(v); }
  void axpy(cplx z, const vector_type& u, vector_type& w) const { w.noalias() += z * u; }
  void scale(cplx z, vector_type& w) const { w *= z; }

  vector_type apply(const vector_type& u) const {
    if (propagator_.cols() != u.size()) {
      throw PropagatorFailure("propagator and vector dimensions differ");
    }
    return propagator_ * u;
  }

  std::size_t footprint(const vector_type& u) const {
    return static_cast<std::size_t>(u.size()) * sizeof(cplx);
  }

  void write(const vector_type& u, std::ostream& os) const {
    const std::int64_t n = u.size();
    detail::write_raw(os, &n, sizeof n);
    detail::write_raw(os, u.data(), static_cast<std::size_t>(n) * sizeof(cplx));
  }

  vector_type read(std::istream& is) const {
    std::int64_t n = 0;
    detail::read_raw(is, &n, sizeof n);
    vector_type u(n);
    detail::read_raw(is, u.data(), static_cast<std::size_t>(n) * sizeof(cplx));
    return u;
  }

  const Eigen::MatrixXcd& propagator() const { return propagator_; }

private:
  Eigen::MatrixXcd propagator_;
};

} // namespace kcorr::krylov
