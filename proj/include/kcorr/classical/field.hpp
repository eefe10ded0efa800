#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "kcorr/classical/geometry.hpp"
#include "kcorr/errors.hpp"

namespace kcorr::classical {

/// Real function sampled at the nodes of a PhaseSpaceGeometry.
struct PhaseSpaceField {
  PhaseSpaceGeometry geometry;
  Eigen::VectorXd values;

  PhaseSpaceField() = default;
  PhaseSpaceField(PhaseSpaceGeometry g, Eigen::VectorXd v) : geometry(g), values(std::move(v)) {
    if (static_cast<std::size_t>(values.size()) != geometry.nodes()) {
      throw GeometryMismatch("field has " + std::to_string(values.size()) + " values for " +
                             std::to_string(geometry.nodes()) + " nodes");
    }
  }

  double operator()(int i, int j) const { return values(static_cast<Eigen::Index>(geometry.index(i, j))); }
  double integral() const { return values.sum() * geometry.cell_area(); }
};

/// Midpoint-rule L² inner product Σ f g Δq Δp.
inline double l2_inner(const PhaseSpaceField& f, const PhaseSpaceField& g) {
  if (!(f.geometry == g.geometry)) throw GeometryMismatch("fields live on different grids");
  return f.values.dot(g.values) * f.geometry.cell_area();
}

namespace detail {

inline std::uint64_t bswap64(std::uint64_t x) {
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r = (r << 8) | ((x >> (8 * i)) & 0xffu);
  return r;
}

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_le_doubles(std::ostream& os, const double* data, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      auto bits = bswap64(std::bit_cast<std::uint64_t>(data[i]));
      os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
}

inline void read_le_doubles(std::istream& is, double* data, std::size_t n) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if constexpr (std::endian::native != std::endian::little) {
    for (std::size_t i = 0; i < n; ++i) {
      data[i] = std::bit_cast<double>(bswap64(std::bit_cast<std::uint64_t>(data[i])));
    }
  }
}

} // namespace detail

/// KCFIELD v1: one text header line, then M×M little-endian doubles, q-major.
inline void write_kcfield(std::ostream& os, const PhaseSpaceField& f) {
  const auto& g = f.geometry;
  os << "KCFIELD v1 kind=" << to_string(g.kind) << " M=" << g.M
     << " qlo=" << detail::format_double(g.qlo) << " qhi=" << detail::format_double(g.qhi)
     << " plo=" << detail::format_double(g.plo) << " phi=" << detail::format_double(g.phi) << '\n';
  detail::write_le_doubles(os, f.values.data(), static_cast<std::size_t>(f.values.size()));
  if (!os) throw StorageError("failed writing KCFIELD data");
}

inline void write_kcfield(const std::filesystem::path& path, const PhaseSpaceField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw StorageError("cannot open " + path.string());
  write_kcfield(os, f);
}

inline PhaseSpaceField read_kcfield(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw StorageError("missing KCFIELD header");
  std::istringstream hs(header);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "KCFIELD" || version != "v1") throw StorageError("not a KCFIELD v1 stream");
  PhaseSpaceGeometry g;
  std::string tok;
  int seen = 0;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw StorageError("malformed KCFIELD token " + tok);
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    if (key == "kind") {
      if (val == "plane") g.kind = GeometryKind::plane;
      else if (val == "torus") g.kind = GeometryKind::torus;
      else throw StorageError("unknown KCFIELD kind " + val);
    } else if (key == "M") g.M = std::stoi(val);
    else if (key == "qlo") g.qlo = std::stod(val);
    else if (key == "qhi") g.qhi = std::stod(val);
    else if (key == "plo") g.plo = std::stod(val);
    else if (key == "phi") g.phi = std::stod(val);
    else continue;
    ++seen;
  }
  if (seen != 6 || g.M < 2) throw StorageError("incomplete KCFIELD header");
  Eigen::VectorXd v(static_cast<Eigen::Index>(g.nodes()));
  detail::read_le_doubles(is, v.data(), g.nodes());
  if (!is) throw StorageError("truncated KCFIELD data");
  return PhaseSpaceField(g, std::move(v));
}

inline PhaseSpaceField read_kcfield(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw StorageError("cannot open " + path.string());
  return read_kcfield(is);
}

} // namespace kcorr::classical
