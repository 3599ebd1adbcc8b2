#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "random_profiles.hpp"
#include "warprig/ambient_oracle.hpp"

using namespace warprig;
using oracle::AmbientPoint;

namespace {

constexpr double kPi = std::numbers::pi;

WarpedMetricSpec model(int n) {
  return WarpedMetricSpec::make(n, WarpProfile(2.0, {1.0}, {}), std::vector<double>(n - 1, 2 * kPi));
}

AmbientPoint at(double t, int d) { return {t, std::vector<double>(d, 0.37)}; }

}  // namespace

TEST(AmbientOracle, MetricComponents) {
  const auto g = oracle::metric_at(model(3), at(0.0, 2)).components;
  EXPECT_NEAR(g(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(g(1, 1), 9.0, 1e-15);
  EXPECT_NEAR(g(2, 2), 9.0, 1e-15);
  EXPECT_EQ(g(0, 1), 0.0);
  const auto flat = WarpedMetricSpec::make(4, WarpProfile::constant(1.0), {1.0, 2.0, 3.0});
  EXPECT_TRUE(oracle::metric_at(flat, at(1.2, 3)).components.isApprox(Eigen::MatrixXd::Identity(4, 4)));
}

TEST(AmbientOracle, ReduceWrapsFiberCoordinates) {
  const auto spec = model(3);
  const AmbientPoint p = oracle::reduce(spec, {0.5, {-1.0, 4 * kPi + 0.25}});
  EXPECT_NEAR(p.x[0], 2 * kPi - 1.0, 1e-14);
  EXPECT_NEAR(p.x[1], 0.25, 1e-12);
}

TEST(AmbientOracle, FlatProductGivesZero) {
  const auto spec = WarpedMetricSpec::make(3, WarpProfile::constant(1.0), {2 * kPi, 2 * kPi});
  const auto c = oracle::curvature_fd(spec, at(0.4, 2), 1e-3);
  EXPECT_LE(c.ricci.cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE(std::abs(c.scalar), 1e-9);
}

TEST(AmbientOracle, ModelValuesAgreeWithClosedForm) {
  const auto spec = model(3);
  const auto c0 = oracle::curvature_fd_richardson(spec, at(0.0, 2), 1e-3);
  EXPECT_NEAR(c0.ricci(0, 0), 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(c0.scalar, 4.0 / 3.0, 1e-6);
  const auto c1 = oracle::curvature_fd_richardson(spec, at(kPi / 2, 2), 1e-3);
  EXPECT_NEAR(c1.scalar, -0.5, 1e-6);
}

TEST(AmbientOracle, RicciIsSymmetric) {
  const auto c = oracle::curvature_fd(model(4), at(1.1, 3), 1e-3);
  EXPECT_LE((c.ricci - c.ricci.transpose()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(AmbientOracle, AgreesWithClosedFormOnRandomProfiles) {
  testing_support::ProfileGenerator gen(99);
  for (int trial = 0; trial < 8; ++trial) {
    const WarpProfile f = gen.next();
    for (int n : {3, 5}) {
      const auto spec = WarpedMetricSpec::make(n, f, std::vector<double>(n - 1, 2 * kPi));
      const double t = gen.uniform(0.0, 2 * kPi);
      const auto c = oracle::curvature_fd_richardson(spec, at(t, n - 1), 1e-3);
      const auto ref = curvature_profile(spec, t);
      const double fv = f(t);
      EXPECT_NEAR(c.ricci(0, 0), ref.ric_tt, 1e-6 * (1 + std::abs(ref.ric_tt)));
      EXPECT_NEAR(c.ricci(1, 1) / (fv * fv), ref.ric_fiber_coeff, 1e-6 * (1 + std::abs(ref.ric_fiber_coeff)));
      EXPECT_NEAR(c.scalar, ref.scalar, 1e-6 * (1 + std::abs(ref.scalar)));
    }
  }
}

TEST(AmbientOracle, ErrorDecaysAtSecondOrder) {
  const auto spec = model(3);
  for (double t : {0.7, 2.3}) {
    const double exact = curvature_profile(spec, t).scalar;
    const double e1 = std::abs(oracle::curvature_fd(spec, at(t, 2), 1e-2).scalar - exact);
    const double e2 = std::abs(oracle::curvature_fd(spec, at(t, 2), 5e-3).scalar - exact);
    EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.2);
  }
}

TEST(AmbientOracle, GenericFieldRoundSphereCap) {
  // Round 2-sphere of radius 2 in polar coordinates: K = 1/4, scalar 1/2.
  const oracle::MetricField sphere = [](const Eigen::VectorXd& y) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
    g(0, 0) = 4.0;
    g(1, 1) = 4.0 * std::sin(y[0]) * std::sin(y[0]);
    return g;
  };
  Eigen::VectorXd y(2);
  y << 1.0, 0.3;
  EXPECT_NEAR(oracle::curvature_fd(sphere, y, 1e-3).scalar, 0.5, 1e-6);
}

TEST(AmbientOracle, RejectsStepOutsideRange) {
  EXPECT_THROW(oracle::curvature_fd(model(3), at(0.0, 2), 1e-7), std::invalid_argument);
  EXPECT_THROW(oracle::curvature_fd(model(3), at(0.0, 2), 0.1), std::invalid_argument);
}
