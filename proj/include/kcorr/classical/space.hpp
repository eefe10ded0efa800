#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <istream>
#include <ostream>

#include "kcorr/classical/field.hpp"
#include "kcorr/krylov/space.hpp"

namespace kcorr::classical {

/// Real phase-space fields with the L² inner product. There is no
/// propagator; Krylov spaces are built from snapshots by Gram-Schmidt.
class FieldSpace {
public:
  using vector_type = Eigen::VectorXd;
  using cplx = krylov::cplx;

  explicit FieldSpace(PhaseSpaceGeometry g) : geometry_(g), area_(g.cell_area()) {}

  cplx inner(const vector_type& u, const vector_type& v) const { return u.dot(v) * area_; }
  void axpy(cplx z, const vector_type& u, vector_type& w) const {
    w.noalias() += krylov::require_real(z, "FieldSpace::axpy") * u;
  }
  void scale(cplx z, vector_type& w) const { w *= krylov::require_real(z, "FieldSpace::scale"); }

  std::size_t footprint(const vector_type& u) const {
    return static_cast<std::size_t>(u.size()) * sizeof(double);
  }
  void write(const vector_type& u, std::ostream& os) const {
    const std::int64_t n = u.size();
    krylov::detail::write_raw(os, &n, sizeof n);
    krylov::detail::write_raw(os, u.data(), static_cast<std::size_t>(n) * sizeof(double));
  }
  vector_type read(std::istream& is) const {
    std::int64_t n = 0;
    krylov::detail::read_raw(is, &n, sizeof n);
    vector_type u(n);
    krylov::detail::read_raw(is, u.data(), static_cast<std::size_t>(n) * sizeof(double));
    return u;
  }

  const PhaseSpaceGeometry& geometry() const { return geometry_; }
  PhaseSpaceField field(const vector_type& u) const { return PhaseSpaceField(geometry_, u); }

private:
  PhaseSpaceGeometry geometry_;
  double area_;
};

} // namespace kcorr::classical
