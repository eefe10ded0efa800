#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

namespace kcorr::classical {

struct PhasePoint {
  double q = 0.0;
  double p = 0.0;
};

/// Derivatives of the kick potentials of q' = q + g'(p), p' = p - f'(q').
struct KickData {
  std::function<double(double)> f1; // f'(q)
  std::function<double(double)> g1; // g'(p)
  std::function<double(double)> f2; // f''(q)
  std::function<double(double)> g2; // g''(p)
};

/// Invertible area-preserving map with optional kick data.
struct ClassicalMapSpec {
  std::string name;
  std::function<PhasePoint(PhasePoint)> forward;
  std::function<PhasePoint(PhasePoint)> inverse;
  std::optional<KickData> kick;
  bool periodic = false; // coordinates taken mod 1
  double parameter = 0.0;
};

inline double wrap_unit(double x) {
  x -= std::floor(x);
  return x >= 1.0 ? 0.0 : x;
}

/// Map of the kicked form q' = q + g'(p), p' = p - f'(q'), inverted
/// sequentially: p = p' + f'(q'), q = q' - g'(p).
inline ClassicalMapSpec kicked_map(std::string name, KickData kick, bool periodic, double parameter) {
  ClassicalMapSpec m;
  m.name = std::move(name);
  m.periodic = periodic;
  m.parameter = parameter;
  m.forward = [k = kick, periodic](PhasePoint x) {
    double q = x.q + k.g1(x.p);
    if (periodic) q = wrap_unit(q);
    double p = x.p - k.f1(q);
    if (periodic) p = wrap_unit(p);
    return PhasePoint{q, p};
  };
  m.inverse = [k = kick, periodic](PhasePoint x) {
    double p = x.p + k.f1(x.q);
    if (periodic) p = wrap_unit(p);
    double q = x.q - k.g1(p);
    if (periodic) q = wrap_unit(q);
    return PhasePoint{q, p};
  };
  m.kick = std::move(kick);
  return m;
}

/// q' = q + τp, p' = p - τq'.
inline ClassicalMapSpec oscillator_map(double tau) {
  KickData k{
      [tau](double q) { return tau * q; },
      [tau](double p) { return tau * p; },
      [tau](double) { return tau; },
      [tau](double) { return tau; },
  };
  return kicked_map("oscillator", std::move(k), false, tau);
}

/// q' = q - k sin 2πp, p' = p + k sin 2πq' on the unit torus, from the
/// kick potentials f(q) = (k/2π) cos 2πq and g(p) = (k/2π) cos 2πp.
inline ClassicalMapSpec harper_map(double k) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  KickData kd{
      [k](double q) { return -k * std::sin(two_pi * q); },
      [k](double p) { return -k * std::sin(two_pi * p); },
      [k](double q) { return -two_pi * k * std::cos(two_pi * q); },
      [k](double p) { return -two_pi * k * std::cos(two_pi * p); },
  };
  return kicked_map("harper", std::move(kd), true, k);
}

} // namespace kcorr::classical
