#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "kcorr/classical/field.hpp"
#include "kcorr/classical/maps.hpp"
#include "kcorr/classical/perron_frobenius.hpp"
#include "kcorr/classical/space.hpp"
#include "kcorr/krylov/arnoldi.hpp"

using namespace kcorr::classical;

namespace {

double torus_distance(PhasePoint a, PhasePoint b) {
  auto d = [](double x) { return std::abs(x - std::round(x)); };
  return std::max(d(a.q - b.q), d(a.p - b.p));
}

double jacobian_det(const ClassicalMapSpec& m, PhasePoint x, double h = 1e-6) {
  auto diff = [&](PhasePoint a, PhasePoint b) {
    double dq = a.q - b.q, dp = a.p - b.p;
    if (m.periodic) {
      dq -= std::round(dq);
      dp -= std::round(dp);
    }
    return std::pair{dq, dp};
  };
  const auto [a11, a21] = diff(m.forward({x.q + h, x.p}), m.forward({x.q - h, x.p}));
  const auto [a12, a22] = diff(m.forward({x.q, x.p + h}), m.forward({x.q, x.p - h}));
  return (a11 * a22 - a12 * a21) / (4 * h * h);
}

PhaseSpaceField field_of(const PhaseSpaceGeometry& g, const std::function<double(double, double)>& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(g.nodes()));
  for (int i = 0; i < g.M; ++i)
    for (int j = 0; j < g.M; ++j) v(static_cast<Eigen::Index>(g.index(i, j))) = f(g.q(i), g.p(j));
  return PhaseSpaceField(g, v);
}

} // namespace

TEST(OscillatorMap, ForwardExample) {
  const auto m = oscillator_map(0.1);
  const auto y = m.forward({1.0, 0.0});
  EXPECT_NEAR(y.q, 1.0, 1e-15);
  EXPECT_NEAR(y.p, -0.1, 1e-15);
}

TEST(OscillatorMap, InverseUndoesForward) {
  const auto m = oscillator_map(0.1);
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int k = 0; k < 10000; ++k) {
    const PhasePoint x{u(gen), u(gen)};
    const auto y = m.inverse(m.forward(x));
    ASSERT_NEAR(y.q, x.q, 1e-12);
    ASSERT_NEAR(y.p, x.p, 1e-12);
  }
}

TEST(OscillatorMap, PeriodNearSixtyThree) {
  const double tau = 0.1;
  const auto m = oscillator_map(tau);
  const double period = 2 * std::numbers::pi / std::acos(1 - tau * tau / 2);
  EXPECT_NEAR(period, 62.8, 0.1);
  PhasePoint x{1.0, 0.0};
  for (int t = 0; t < 63; ++t) x = m.forward(x);
  EXPECT_LT(std::hypot(x.q - 1.0, x.p), 0.05);
}

TEST(OscillatorMap, AreaPreserving) {
  const auto m = oscillator_map(0.1);
  EXPECT_NEAR(jacobian_det(m, {0.3, -1.2}), 1.0, 1e-8);
}

TEST(HarperMap, ForwardExample) {
  const auto m = harper_map(0.05);
  const auto y = m.forward({0.5, 0.25});
  EXPECT_NEAR(y.q, 0.45, 1e-15);
  EXPECT_NEAR(y.p, 0.25 + 0.05 * std::sin(0.9 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(y.p, 0.2654508, 1e-7);
}

TEST(HarperMap, ZeroKickIsIdentity) {
  const auto m = harper_map(0.0);
  const auto y = m.forward({0.123, 0.987});
  EXPECT_DOUBLE_EQ(y.q, 0.123);
  EXPECT_DOUBLE_EQ(y.p, 0.987);
}

TEST(HarperMap, InverseUndoesForwardModuloOne) {
  const auto m = harper_map(0.05);
  std::mt19937 gen(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 10000; ++k) {
    const PhasePoint x{u(gen), u(gen)};
    ASSERT_LT(torus_distance(m.inverse(m.forward(x)), x), 1e-12);
  }
}

TEST(HarperMap, AreaPreservingAndKickData) {
  const auto m = harper_map(0.05);
  EXPECT_NEAR(jacobian_det(m, {0.31, 0.77}), 1.0, 1e-8);
  ASSERT_TRUE(m.kick.has_value());
  EXPECT_NEAR(m.kick->f2(0.0), -2 * std::numbers::pi * 0.05, 1e-15);
  EXPECT_NEAR(m.kick->g2(0.5), 2 * std::numbers::pi * 0.05, 1e-15);
}

TEST(Geometry, PlaneWindowSatisfiesResolutionGuard) {
  const auto g = PhaseSpaceGeometry::plane_for(1.0, 0.0, 0.1);
  EXPECT_DOUBLE_EQ(g.qhi, 1.8);
  EXPECT_EQ(g.M, 288);
  EXPECT_NO_THROW(g.check_resolution(0.1));
  EXPECT_THROW(PhaseSpaceGeometry::plane(1.8, 256).check_resolution(0.1), kcorr::ResolutionError);
  EXPECT_NO_THROW(PhaseSpaceGeometry::torus(512).check_resolution(0.025));
}

TEST(GaussianInitial, PlanePeakAndNormalization) {
  const auto g = PhaseSpaceGeometry::plane_for(1.0, 0.0, 0.1);
  const auto rho = gaussian_initial({1.0, 0.0}, 0.1, g);
  EXPECT_NEAR(rho(1.0, 0.0), 15.915494309189533, 1e-12);
  EXPECT_NEAR(field_of(g, [&](double q, double p) { return rho(q, p); }).integral(), 1.0, 1e-10);
}

TEST(GaussianInitial, TorusPeriodicSymmetry) {
  const auto g = PhaseSpaceGeometry::torus(512);
  const auto rho = gaussian_initial({0.4, 0.5}, 0.025, g);
  EXPECT_DOUBLE_EQ(rho(0.9, 0.5), rho(-0.1, 0.5));
  EXPECT_NEAR(rho(0.4 + 0.5, 0.5), rho(0.4 - 0.5, 0.5), 1e-300);
  EXPECT_NEAR(field_of(g, [&](double q, double p) { return rho(q, p); }).integral(), 1.0, 1e-10);
}

TEST(GaussianInitial, ResolutionGuard) {
  EXPECT_THROW(gaussian_initial({0, 0}, 0.1, PhaseSpaceGeometry::plane(1.8, 100)), kcorr::ResolutionError);
}

TEST(PerronFrobenius, IdentityMapKeepsField) {
  const auto g = PhaseSpaceGeometry::torus(128);
  auto s = BackTrajectoryState::start(g, gaussian_initial({0.4, 0.5}, 0.1, g));
  const auto f0 = s.materialize();
  const auto id = harper_map(0.0);
  for (int t = 0; t < 5; ++t) s = pf_evolve(std::move(s), id);
  EXPECT_EQ(s.t, 5);
  EXPECT_EQ((s.materialize().values - f0.values).cwiseAbs().maxCoeff(), 0.0);
}

TEST(PerronFrobenius, OscillatorStepIsAnalyticComposition) {
  const double tau = 0.1, sigma = 0.1;
  const auto g = PhaseSpaceGeometry::plane_for(1.0, 0.0, sigma);
  auto s = BackTrajectoryState::start(g, gaussian_initial({1.0, 0.0}, sigma, g));
  s = pf_evolve(std::move(s), oscillator_map(tau));
  Eigen::Matrix2d A;
  A << 1, tau, -tau, 1 - tau * tau;
  const Eigen::Vector2d mu = A * Eigen::Vector2d(1.0, 0.0);
  const Eigen::Matrix2d Sinv = (sigma * sigma * A * A.transpose()).inverse();
  const auto expected = field_of(g, [&](double q, double p) {
    const Eigen::Vector2d d = Eigen::Vector2d(q, p) - mu;
    return std::exp(-0.5 * d.dot(Sinv * d)) / (2 * std::numbers::pi * sigma * sigma);
  });
  EXPECT_LT((s.materialize().values - expected.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PerronFrobenius, SupNormInvariant) {
  const auto g = PhaseSpaceGeometry::torus(256);
  auto s = BackTrajectoryState::start(g, gaussian_initial({0.4, 0.5}, 0.05, g));
  const double sup0 = s.materialize().values.maxCoeff();
  const auto m = harper_map(0.05);
  for (int t = 0; t < 20; ++t) s = pf_evolve(std::move(s), m);
  EXPECT_NEAR(s.materialize().values.maxCoeff(), sup0, 1e-3 * sup0);
  EXPECT_LE(s.materialize().values.maxCoeff(), gaussian_initial({0.4, 0.5}, 0.05, g)(0.4, 0.5) * (1 + 1e-14));
}

TEST(L2Inner, GaussianSelfOverlap) {
  const double sigma = 0.1;
  const auto g = PhaseSpaceGeometry::plane_for(1.0, 0.0, sigma);
  const auto rho = gaussian_initial({1.0, 0.0}, sigma, g);
  const auto f = field_of(g, [&](double q, double p) { return rho(q, p); });
  const double expected = 1.0 / (4 * std::numbers::pi * sigma * sigma);
  EXPECT_NEAR(l2_inner(f, f) / expected, 1.0, 1e-6);
  EXPECT_NEAR(expected, 7.957747, 1e-6);
}

TEST(L2Inner, DisjointIndicatorsAreOrthogonal) {
  const auto g = PhaseSpaceGeometry::torus(32);
  const auto a = field_of(g, [](double q, double) { return q < 0.5 ? 1.0 : 0.0; });
  const auto b = field_of(g, [](double q, double) { return q >= 0.5 ? 1.0 : 0.0; });
  EXPECT_EQ(l2_inner(a, b), 0.0);
}

TEST(L2Inner, SeparatedGaussiansOverlap) {
  const double sigma = 0.1, d = 0.15;
  const auto g = PhaseSpaceGeometry::plane(1.2, 256);
  const auto r1 = gaussian_initial({0.0, 0.0}, sigma, g);
  const auto r2 = gaussian_initial({d, 0.0}, sigma, g);
  const auto f1 = field_of(g, [&](double q, double p) { return r1(q, p); });
  const auto f2 = field_of(g, [&](double q, double p) { return r2(q, p); });
  const double overlap = l2_inner(f1, f2) / std::sqrt(l2_inner(f1, f1) * l2_inner(f2, f2));
  EXPECT_NEAR(overlap / std::exp(-d * d / (4 * sigma * sigma)), 1.0, 1e-6);
}

TEST(L2Inner, GeometryMismatch) {
  const auto a = field_of(PhaseSpaceGeometry::torus(8), [](double, double) { return 1.0; });
  const auto b = field_of(PhaseSpaceGeometry::torus(16), [](double, double) { return 1.0; });
  EXPECT_THROW(l2_inner(a, b), kcorr::GeometryMismatch);
}

TEST(L2Inner, QuadratureConvergesUnderRefinement) {
  const double sigma = 0.025;
  auto self = [&](int M) {
    const auto g = PhaseSpaceGeometry::torus(M);
    const auto rho = gaussian_initial({0.4, 0.5}, sigma, g);
    const auto f = field_of(g, [&](double q, double p) { return rho(q, p); });
    return l2_inner(f, f);
  };
  const double a = self(512), b = self(1024);
  EXPECT_LT(std::abs(a - b) / b, 1e-8);
}

TEST(KcField, RoundTrip) {
  const auto g = PhaseSpaceGeometry::plane(1.5, 6);
  const auto f = field_of(g, [](double q, double p) { return q * 3.0 - p + 0.1; });
  std::stringstream ss;
  write_kcfield(ss, f);
  std::string header;
  {
    std::stringstream copy(ss.str());
    std::getline(copy, header);
  }
  EXPECT_EQ(header, "KCFIELD v1 kind=plane M=6 qlo=-1.5 qhi=1.5 plo=-1.5 phi=1.5");
  EXPECT_EQ(ss.str().size(), header.size() + 1 + 36 * 8);
  const auto back = read_kcfield(ss);
  EXPECT_TRUE(back.geometry == g);
  EXPECT_EQ(back.values, f.values);
}

TEST(FieldSpace, RejectsComplexCoefficients) {
  FieldSpace sp(PhaseSpaceGeometry::torus(4));
  Eigen::VectorXd w = Eigen::VectorXd::Ones(16);
  EXPECT_THROW(sp.scale(kcorr::krylov::cplx(1.0, 0.5), w), kcorr::RealnessViolation);
  EXPECT_NO_THROW(sp.scale(2.0, w));
}

TEST(ClassicalKrylov, StatesOscillateAndStayReal) {
  const double sigma = 0.1;
  const auto g = PhaseSpaceGeometry::plane_for(1.0, 0.0, sigma);
  const auto map = oscillator_map(0.1);
  FieldSpace sp(g);
  auto state = BackTrajectoryState::start(g, gaussian_initial({1.0, 0.0}, sigma, g));
  auto r = kcorr::krylov::gram_schmidt_build(sp, 12, [&](std::size_t t) {
    if (t > 0) state = pf_evolve(std::move(state), map);
    return state.materialize().values;
  }, {});
  ASSERT_EQ(r.size(), 11u);
  EXPECT_GE(r.basis.get(0).minCoeff(), 0.0);
  for (std::size_t n = 1; n < r.size(); ++n) {
    const Eigen::VectorXd k = r.basis.get(n);
    EXPECT_LT(k.minCoeff(), 0.0);
    EXPECT_GT(k.maxCoeff(), 0.0);
    EXPECT_NEAR(std::real(sp.inner(k, r.basis.get(0))), 0.0, 1e-10);
  }
  for (std::size_t n = 0; n < r.size(); ++n) {
    EXPECT_LT(std::abs(r.a[n].imag()) + std::abs(r.b[n].imag()) + std::abs(r.c[n].imag()), 1e-10);
  }
  EXPECT_LT(r.beta.imag().cwiseAbs().maxCoeff(), 1e-10);
  // Tail of the chain approaches the ergodic profile.
  EXPECT_NEAR(std::abs(r.b[10]), 1.0, 0.1);
}
