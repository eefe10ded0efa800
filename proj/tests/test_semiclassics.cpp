#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kcorr/classical/maps.hpp"
#include "kcorr/quantum/system.hpp"
#include "kcorr/semiclassics/semiclassics.hpp"

using namespace kcorr::semiclassics;

namespace {

kcorr::quantum::QuantumSystem harper(int N, double k) {
  return kcorr::quantum::harper_unitary(kcorr::quantum::build_torus_system(N, 0.5, 0.0), k);
}

kcorr::quantum::QuantumSystem oscillator(double hbar, double tau, double reach) {
  const double amax = reach / std::sqrt(2 * hbar);
  return kcorr::quantum::oscillator_unitary(kcorr::quantum::oscillator_truncation(amax), tau, hbar, amax);
}

} // namespace

TEST(SqueezeParams, FreeCase) {
  const auto s = squeeze_from_curvatures(0.0, 0.0);
  EXPECT_EQ(s.sigma, cplx(1.0, 0.0));
  EXPECT_EQ(s.delta, 0.0);
}

TEST(SqueezeParams, UnitMomentumCurvature) {
  const auto s = squeeze_from_curvatures(0.0, 1.0);
  EXPECT_EQ(s.sigma, cplx(1.0, 1.0));
  EXPECT_EQ(s.delta, 1.0);
}

TEST(SqueezeParams, HarperAtOrigin) {
  const auto s = squeeze_params(kcorr::classical::harper_map(0.05), {0.0, 0.0});
  EXPECT_NEAR(s.f2, -0.3141592653589793, 1e-15);
  EXPECT_NEAR(s.g2, -0.3141592653589793, 1e-15);
  EXPECT_NEAR(s.sigma.real(), 1 - 0.098696044010893586, 1e-15);
  EXPECT_NEAR(s.sigma.imag(), -0.3141592653589793, 1e-15);
  EXPECT_NEAR(s.delta, 0.098696044010893586, 1e-15);
}

TEST(SqueezeParams, EvaluatesGAtShiftedMomentum) {
  const auto map = kcorr::classical::harper_map(0.05);
  const PhasePoint x{0.1, 0.3};
  const auto s = squeeze_params(map, x);
  EXPECT_DOUBLE_EQ(s.at.p, x.p + map.kick->f1(x.q));
  EXPECT_DOUBLE_EQ(s.g2, map.kick->g2(s.at.p));
}

TEST(SqueezeParams, MissingKickData) {
  kcorr::classical::ClassicalMapSpec bare;
  bare.name = "bare";
  EXPECT_THROW(squeeze_params(bare, {0, 0}), kcorr::MissingKickData);
}

TEST(Covariance, FreeCaseIsIdentity) {
  const auto c = covariance_prediction(squeeze_from_curvatures(0.0, 0.0));
  EXPECT_LT((c.V_inv - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((c.V - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(c.eigenvalues(0), 1.0, 1e-15);
  EXPECT_NEAR(c.eigenvalues(1), 1.0, 1e-15);
}

TEST(Covariance, DeterminantIdentityAndPositivity) {
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int k = 0; k < 1000; ++k) {
    const auto s = squeeze_from_curvatures(u(gen), u(gen));
    const auto c = covariance_prediction(s);
    const double s2 = std::norm(s.sigma);
    const double expected = 4 * s2 / ((s2 + 1) * (s2 + 1) + s.delta * s.delta);
    ASSERT_NEAR(c.V_inv.determinant(), expected, 1e-12 * std::max(1.0, expected));
    ASSERT_EQ(c.V_inv(0, 1), c.V_inv(1, 0));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(c.V_inv);
    ASSERT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Covariance, PositionVarianceMatchesLinearizedBackwardStep) {
  // V_qq = (|σ|²+1)/2 equals the qq entry of (JJᵀ + I)/2 for the inverse
  // step; the entries involving δ do not.
  const auto map = kcorr::classical::harper_map(0.05);
  for (PhasePoint x : {PhasePoint{0.4, 0.5}, PhasePoint{0.1, 0.3}, PhasePoint{0.25, 0.7}}) {
    const auto c = covariance_prediction(squeeze_params(map, x));
    const Eigen::Matrix2d J = inverse_jacobian(map, x);
    const Eigen::Matrix2d L = 0.5 * (J * J.transpose() + Eigen::Matrix2d::Identity());
    EXPECT_NEAR(c.V(0, 0), L(0, 0), 1e-12);
  }
}

TEST(OneStep, HarperMeanFollowsClassicalImage) {
  const auto s = harper(256, 0.05);
  const auto r = one_step_check(s, kcorr::classical::harper_map(0.05), {0.4, 0.5});
  EXPECT_LE(r.mean_offset_cells, 2.0);
  EXPECT_NEAR(r.fit.mass, 1.0, 1e-6);
  EXPECT_LT(r.rel_error_linearized, 0.02);
}

TEST(OneStep, IdentityDynamicsGivesCoherentWidth) {
  // Husimi of a coherent state has covariance ħI.
  const auto s = harper(256, 0.0);
  const auto r = one_step_check(s, kcorr::classical::harper_map(0.0), {0.4, 0.5});
  EXPECT_LT((r.fit.covariance - s.hbar * Eigen::Matrix2d::Identity()).norm() / s.hbar, 0.02);
  EXPECT_LT(r.l1_distance, 1e-10);
}

TEST(OneStep, OscillatorCovarianceFollowsLinearization) {
  const double hbar = 1.0 / 128;
  const auto s = oscillator(hbar, 0.1, 2.5);
  const auto r = one_step_check(s, kcorr::classical::oscillator_map(0.1), {1.0, 0.0}, {.grid_M = 128});
  const auto pred = covariance_prediction(forward_squeeze_params(kcorr::classical::oscillator_map(0.1), {1.0, 0.0}));
  EXPECT_LT((pred.V - Eigen::Matrix2d::Identity()).norm(), 0.2);
  EXPECT_LT(r.rel_error_linearized, 0.05);
}

TEST(OneStep, BackwardAgreesWithForwardUnderRelabeling) {
  const auto s = harper(128, 0.05);
  const auto map = kcorr::classical::harper_map(0.05);
  const PhasePoint x{0.4, 0.5};
  const auto fwd = one_step_check(s, map, x);
  const auto bwd = one_step_check(s, map, map.forward(x), {.direction = StepDirection::backward});
  EXPECT_NEAR(bwd.classical_image.q, x.q, 1e-12);
  EXPECT_NEAR(bwd.classical_image.p, x.p, 1e-12);
  // Both are the linearized image of a unit-width state; the fits agree
  // with their own linearized targets.
  EXPECT_LT(fwd.rel_error_linearized, 0.03);
  EXPECT_LT(bwd.rel_error_linearized, 0.03);
  EXPECT_LE(bwd.mean_offset_cells, 2.0);
}

TEST(Ehrenfest, Scalings) {
  EXPECT_DOUBLE_EQ(ehrenfest_estimate(1.0, Stability::stable), 1.0);
  EXPECT_DOUBLE_EQ(ehrenfest_estimate(0.01 / 4, Stability::stable) / ehrenfest_estimate(0.01, Stability::stable), 2.0);
  const double h = 1e-3;
  EXPECT_NEAR(ehrenfest_estimate(h * h, Stability::unstable, 0.7) / ehrenfest_estimate(h, Stability::unstable, 0.7),
              2.0, 1e-12);
}
