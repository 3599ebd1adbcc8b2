#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "warprig/minimize_stability.hpp"

using namespace warprig;

namespace {

constexpr double kPi = std::numbers::pi;

WarpedMetricSpec model(int n) {
  return WarpedMetricSpec::make(n, WarpProfile(2.0, {1.0}, {}), std::vector<double>(n - 1, 2 * kPi));
}

WarpedMetricSpec flat(int n) {
  return WarpedMetricSpec::make(n, WarpProfile::constant(1.0), std::vector<double>(n - 1, 2 * kPi));
}

PeriodicGrid grid2(int res) { return PeriodicGrid({res, res}, {2 * kPi, 2 * kPi}); }

double deviation_from_slice(const GraphSurface& s) {
  const double m = s.mean_height();
  double e = 0;
  for (double r : s.rho) e = std::max(e, std::abs(r - m));
  return e;
}

GraphSurface cosine_start(const PeriodicGrid& g) {
  return GraphSurface::from_function(g, [](auto x) { return 0.2 * std::cos(x[0]); });
}

}  // namespace

TEST(SolveOptions, DefaultsAndValidation) {
  SolveOptions o;
  EXPECT_EQ(o.iteration_limit(), 50);
  o.mode = SolveMode::gradient_flow;
  EXPECT_EQ(o.iteration_limit(), 500);
  o.tolerance = -1;
  EXPECT_THROW(o.validate(), std::invalid_argument);
}

TEST(Minimize, NewtonReachesSliceWithCanonicalWeight) {
  const auto r = minimize_weighted_area(cosine_start(grid2(32)), model(3), RadialWeight::canonical());
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_NEAR(r.energy, 4 * kPi * kPi, 1e-8);
  EXPECT_LE(deviation_from_slice(r.surface), 1e-8);
  ASSERT_FALSE(r.trace.empty());
  EXPECT_EQ(r.trace.back().residual, r.residual);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].residual, r.trace[i - 1].residual);
}

TEST(Minimize, GradientFlowReachesSliceWithCanonicalWeight) {
  SolveOptions o;
  o.mode = SolveMode::gradient_flow;
  o.tolerance = 1e-9;
  const auto r = minimize_weighted_area(cosine_start(grid2(16)), model(3), RadialWeight::canonical(), o);
  EXPECT_LE(r.residual, 1e-9);
  EXPECT_NEAR(r.energy, 4 * kPi * kPi, 1e-8);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].energy, r.trace[i - 1].energy + 1e-12);
}

TEST(Minimize, UnitWeightSettlesOnNarrowestSlice) {
  // Plain area in the model is minimized by the slice where f is smallest, t = pi.
  const auto start = GraphSurface::from_function(grid2(16), [](auto x) { return 2.6 + 0.1 * std::cos(x[1]); });
  const auto r = minimize_weighted_area(start, model(3), RadialWeight::unit());
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_NEAR(r.surface.mean_height(), kPi, 1e-8);
  EXPECT_NEAR(r.energy, 4 * kPi * kPi, 1e-8);
}

TEST(Minimize, BudgetExhaustionCarriesBestIterate) {
  SolveOptions o;
  o.mode = SolveMode::gradient_flow;
  o.max_iterations = 2;
  try {
    minimize_weighted_area(cosine_start(grid2(16)), model(3), RadialWeight::canonical(), o);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_GT(e.best().residual, 1e-10);
    EXPECT_EQ(e.best().surface.rho.size(), 256u);
  }
}

TEST(Stability, ModelSliceSpectrum) {
  const auto g = grid2(32);
  const auto spec = model(3);
  const auto s = stability_spectrum(GraphSurface::slice(g, 0.0), spec, RadialWeight::canonical(), 4);
  ASSERT_EQ(s.eigenvalues.size(), 4u);
  EXPECT_TRUE(s.dense);
  EXPECT_NEAR(s.eigenvalues[0], 0.0, 1e-8);
  EXPECT_NEAR(s.eigenvalues[1], 1.0 / 9.0, 1e-10);
  EXPECT_NEAR(s.eigenvalues[2], 1.0 / 9.0, 1e-10);
  // Lowest eigenfunction is constant in psi on the slice.
  const auto geo = induced_geometry(GraphSurface::slice(g, 0.0), spec, RadialWeight::canonical());
  const auto dA = geo.area_weights();
  const auto& v = s.eigenfunctions[0];
  double dot = 0, nv = 0, n1 = 0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    dot += dA[p] * v[p];
    nv += dA[p] * v[p] * v[p];
    n1 += dA[p];
  }
  EXPECT_NEAR(nv, 1.0, 1e-12);
  EXPECT_GE(dot / std::sqrt(nv * n1), 1 - 1e-8);
}

TEST(Stability, FlatProductSecondEigenvalueIsOne) {
  const auto s = stability_spectrum(GraphSurface::slice(grid2(16), 0.3), flat(3), RadialWeight::unit(), 6);
  EXPECT_NEAR(s.eigenvalues[0], 0.0, 1e-10);
  for (int k = 1; k <= 4; ++k) EXPECT_NEAR(s.eigenvalues[k], 1.0, 1e-10);
  EXPECT_NEAR(s.eigenvalues[5], 2.0, 1e-10);
}

TEST(Stability, RayleighQuotientsMatchEigenvalues) {
  const auto g = grid2(16);
  const auto spec = model(3);
  const auto geo = induced_geometry(GraphSurface::slice(g, 1.1), spec, RadialWeight::canonical());
  const auto s = stability_spectrum(geo, 5);
  const QuadraticForm q = jacobi_form(geo);
  for (int k = 0; k < 5; ++k) {
    const auto& v = s.eigenfunctions[k];
    double m = 0;
    for (std::size_t p = 0; p < g.size(); ++p) m += q.mass[p] * v[p] * v[p];
    EXPECT_NEAR(q.energy(v) / m, s.eigenvalues[k], 1e-10);
  }
}

TEST(Stability, RefusesNonMinimalSurface) {
  EXPECT_THROW(stability_spectrum(cosine_start(grid2(16)), model(3), RadialWeight::canonical(), 2),
               std::invalid_argument);
}

TEST(Stability, IterativePathAgreesOnLargeGrid) {
  // 72 x 72 exceeds the dense limit.
  const auto s = stability_spectrum(GraphSurface::slice(grid2(72), 0.0), model(3), RadialWeight::canonical(), 3);
  EXPECT_FALSE(s.dense);
  EXPECT_NEAR(s.eigenvalues[0], 0.0, 1e-8);
  EXPECT_NEAR(s.eigenvalues[1], 1.0 / 9.0, 1e-8);
  EXPECT_NEAR(s.eigenvalues[2], 1.0 / 9.0, 1e-8);
}

TEST(Rigidity, ModelSliceIsRigid) {
  for (int n : {3, 4}) {
    const PeriodicGrid g = n == 3 ? grid2(16) : PeriodicGrid({8, 8, 8}, {2 * kPi, 2 * kPi, 2 * kPi});
    for (double c : {0.0, 2.0}) {
      const auto r = rigidity_report(GraphSurface::slice(g, c), model(n), RadialWeight::canonical());
      EXPECT_LE(r.umbilicity_residual, 1e-10);
      EXPECT_LE(r.tangential_w_residual, 1e-10);
      EXPECT_LE(r.spectral_equality_residual, 1e-10);
      EXPECT_LE(r.htilde_residual, 1e-10);
    }
  }
  const auto g4 = PeriodicGrid({8, 8, 8}, {2 * kPi, 2 * kPi, 2 * kPi});
  const auto rs = rigidity_report(GraphSurface::slice(g4, 0.5), model(4), RadialWeight::canonical(), SpectralKind::scalar);
  EXPECT_LE(rs.spectral_equality_residual, 1e-10);
}

TEST(Rigidity, PerturbedSurfaceIsNotRigid) {
  const auto r = rigidity_report(cosine_start(grid2(16)), model(3), RadialWeight::canonical());
  EXPECT_GT(r.umbilicity_residual, 1e-3);
  EXPECT_GT(r.tangential_w_residual, 1e-3);
  EXPECT_GT(r.htilde_residual, 1e-3);
}

TEST(Conformal, FlatThreeTorus) {
  const auto spec = WarpedMetricSpec::make(4, WarpProfile::constant(1.0), {2 * kPi, 2 * kPi, 2 * kPi});
  const PeriodicGrid g({8, 8, 8}, {2 * kPi, 2 * kPi, 2 * kPi});
  const auto ev = conformal_operator_spectrum(spec, g, 8);
  ASSERT_EQ(ev.size(), 8u);
  EXPECT_NEAR(ev[0], 0.0, 1e-10);
  for (int k = 1; k <= 6; ++k) EXPECT_NEAR(ev[k], 4.0, 1e-10);
  EXPECT_NEAR(ev[7], 8.0, 1e-10);
}

TEST(Conformal, SliceMatchesScaledFiber) {
  // The slice t = c is a flat torus scaled by f(c), so eigenvalues scale by 1/f^2.
  const auto spec = model(4);
  const PeriodicGrid g({8, 8, 8}, {2 * kPi, 2 * kPi, 2 * kPi});
  const auto geo = induced_geometry(GraphSurface::slice(g, 0.0), spec, RadialWeight::canonical());
  for (double sc : gauss_scalar_curvature(geo)) EXPECT_NEAR(sc, 0.0, 1e-12);
  const auto ev = conformal_operator_spectrum(spec, geo, 2);
  EXPECT_NEAR(ev[0], 0.0, 1e-10);
  EXPECT_NEAR(ev[1], 4.0 / 9.0, 1e-10);
}

TEST(Conformal, RejectsThreeDimensionalAmbient) {
  EXPECT_THROW(conformal_operator_spectrum(model(3), grid2(8), 2), std::invalid_argument);
}
