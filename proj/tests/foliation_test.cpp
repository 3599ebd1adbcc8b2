#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "warprig/foliation.hpp"

using namespace warprig;

namespace {

constexpr double kPi = std::numbers::pi;

WarpedMetricSpec model(int n) {
  return WarpedMetricSpec::make(n, WarpProfile(2.0, {1.0}, {}), std::vector<double>(n - 1, 2 * kPi));
}

PeriodicGrid grid2(int res, DifferenceScheme s = DifferenceScheme::spectral) {
  return PeriodicGrid({res, res}, {2 * kPi, 2 * kPi}, s);
}

// u = (1 + 0.01 cos t) / f: on slices H~ = 2 g'/g with g = 1 + 0.01 cos t.
const WarpProfile kBump(1.0, {0.01}, {});

double bump_htilde(double t) { return 2 * kBump.jet(t).d1 / kBump(t); }

// Jacobian of H~ along a normal speed, by central differences of the
// library's H~ (independent of the solver's Jacobian code).
std::vector<double> fd_jacobian(const GraphSurface& s, const WarpedMetricSpec& spec, const RadialWeight& u,
                                const std::vector<double>& phi) {
  const auto geo = induced_geometry(s, spec, u);
  const auto delta = graph_displacement(geo, phi);
  const double eps = 1e-5;
  GraphSurface plus = s, minus = s;
  for (std::size_t p = 0; p < s.rho.size(); ++p) {
    plus.rho[p] += eps * delta[p];
    minus.rho[p] -= eps * delta[p];
  }
  const auto hp = weighted_mean_curvature(plus, spec, u), hm = weighted_mean_curvature(minus, spec, u);
  std::vector<double> out(phi.size());
  for (std::size_t p = 0; p < phi.size(); ++p) out[p] = (hp[p] - hm[p]) / (2 * eps);
  return out;
}

}  // namespace

TEST(SolveLeaf, CanonicalWeightGivesSliceWithZeroHtilde) {
  const auto g = grid2(16);
  const auto init = GraphSurface::from_function(g, [](auto x) { return 0.5 + 0.1 * std::cos(x[0]) * std::sin(x[1]); });
  const auto leaf = solve_leaf(model(3), RadialWeight::canonical(), 0.5, init);
  EXPECT_NEAR(leaf.surface.mean_height(), 0.5, 1e-12);
  EXPECT_LE(leaf.residual, 1e-9);
  EXPECT_NEAR(leaf.htilde, 0.0, 1e-9);
  EXPECT_NEAR(leaf.lagrange, leaf.htilde, 1e-9);
  for (double r : leaf.surface.rho) EXPECT_NEAR(r, 0.5, 1e-9);
  EXPECT_NEAR(leaf.energy, 4 * kPi * kPi, 1e-8);
}

TEST(SolveLeaf, PerturbedWeightMatchesClosedForm) {
  const auto g = grid2(16);
  const auto u = RadialWeight::canonical_times(kBump);
  for (double t : {-1.0, 0.3, 2.0}) {
    const auto init = GraphSurface::from_function(g, [t](auto x) { return t + 0.05 * std::cos(x[1]); });
    const auto leaf = solve_leaf(model(3), u, t, init);
    EXPECT_NEAR(leaf.surface.mean_height(), t, 1e-12);
    EXPECT_NEAR(leaf.htilde, bump_htilde(t), 1e-9);
  }
}

TEST(SolveLeaf, RejectsOutOfChartStart) {
  const auto g = grid2(16);
  const auto init = GraphSurface::from_function(g, [](auto x) { return 4.0 * std::cos(x[0]); });
  EXPECT_THROW(solve_leaf(model(3), RadialWeight::canonical(), 0.0, init), ChartExit);
}

TEST(BuildFoliation, CanonicalFamilyIsSlices) {
  const auto fol = build_foliation(model(3), RadialWeight::canonical(), grid2(16), -0.6, 0.6, 7);
  ASSERT_EQ(fol.leaves.size(), 7u);
  double emin = 1e300, emax = -1e300;
  for (std::size_t k = 0; k < fol.leaves.size(); ++k) {
    const auto& leaf = fol.leaves[k];
    EXPECT_NEAR(leaf.t, -0.6 + 0.2 * k, 1e-14);
    EXPECT_NEAR(leaf.surface.mean_height(), leaf.t, 1e-12);
    EXPECT_LE(std::abs(leaf.htilde), 1e-9);
    for (double v : leaf.phi) EXPECT_NEAR(v, 1.0, 1e-8);
    emin = std::min(emin, leaf.energy);
    emax = std::max(emax, leaf.energy);
  }
  EXPECT_LE(emax - emin, 1e-8);
  ASSERT_EQ(fol.psi.size(), 7u);
  for (double p : fol.psi) EXPECT_NEAR(p, 0.0, 1e-12);  // n = 3
}

TEST(BuildFoliation, RangeWithoutZeroAndValidation) {
  const auto fol = build_foliation(model(3), RadialWeight::canonical_times(kBump), grid2(12), 0.5, 1.5, 3);
  ASSERT_EQ(fol.leaves.size(), 3u);
  for (const auto& leaf : fol.leaves) EXPECT_NEAR(leaf.htilde, bump_htilde(leaf.t), 1e-9);
  EXPECT_THROW(build_foliation(model(3), RadialWeight::canonical(), grid2(12), 1.0, 0.0, 3), std::invalid_argument);
  EXPECT_THROW(build_foliation(model(3), RadialWeight::canonical(), grid2(12), 0.0, 1.0, 0), std::invalid_argument);
}

TEST(Monotonicity, ThreeDimensionalPsiVanishes) {
  const auto u = RadialWeight::canonical_times(kBump);
  const auto fol = build_foliation(model(3), u, grid2(12), -0.4, 0.4, 5);
  const auto rep = monotonicity_report(fol, model(3), u);
  for (std::size_t k = 0; k < rep.t.size(); ++k) {
    EXPECT_NEAR(rep.psi[k], 0.0, 1e-14);
    EXPECT_NEAR(rep.conserved[k], bump_htilde(rep.t[k]), 1e-9);
  }
}

TEST(Monotonicity, ConstantPsiAccumulatesExactly) {
  const auto u = RadialWeight::canonical_times(kBump);
  const auto fol = build_foliation(model(3), u, grid2(12), -0.5, 1.0, 6);
  const auto rep = monotonicity_report(fol, [](double) { return 0.7; });
  double worst = -1e300;
  for (std::size_t k = 0; k < rep.t.size(); ++k) {
    const double expect = std::exp(0.7 * rep.t[k]) * bump_htilde(rep.t[k]);
    EXPECT_NEAR(rep.conserved[k], expect, 1e-9);
    if (k) worst = std::max(worst, (rep.conserved[k] - rep.conserved[k - 1]) / (rep.t[k] - rep.t[k - 1]));
  }
  EXPECT_NEAR(rep.max_violation, worst, 1e-12);
}

TEST(Monotonicity, CanonicalFourDimensionalFamilyIsFlat) {
  const PeriodicGrid g({8, 8, 8}, {2 * kPi, 2 * kPi, 2 * kPi});
  const auto fol = build_foliation(model(4), RadialWeight::canonical(), g, -0.3, 0.3, 3);
  const auto rep = monotonicity_report(fol, model(4), RadialWeight::canonical());
  // Psi = -f'/f on slices (phi = 1, w_nu = -f'/f) while H~ = 0.
  for (std::size_t k = 0; k < rep.t.size(); ++k) {
    const Jet f = model(4).warp.jet(rep.t[k]);
    EXPECT_NEAR(rep.psi[k], -f.d1 / f.value, 1e-9);
    EXPECT_NEAR(rep.conserved[k], 0.0, 1e-9);
  }
  EXPECT_LE(std::abs(rep.max_violation), 1e-8);
}

TEST(Monotonicity, RefusesNonPositiveNormalSpeed) {
  auto fol = build_foliation(model(3), RadialWeight::canonical(), grid2(12), -0.2, 0.2, 3);
  fol.leaves[1].phi[5] = -0.1;
  EXPECT_THROW(leaf_psi(fol, model(3), RadialWeight::canonical()), std::invalid_argument);
  EXPECT_THROW(monotonicity_report(fol, model(3), RadialWeight::canonical()), std::invalid_argument);
  fol.leaves[1].phi.clear();
  EXPECT_THROW(leaf_psi(fol, model(3), RadialWeight::canonical()), std::invalid_argument);
}

TEST(Linearization, SpectralCheckOnModelSlices) {
  for (int res : {16, 32}) {
    const auto g = grid2(res);
    const std::vector<std::vector<double>> tests{
        std::vector<double>(g.size(), 1.0), g.sample([](auto x) { return std::cos(x[0]); }),
        g.sample([](auto x) { return std::sin(x[0] + 2 * x[1]); })};
    for (double c : {0.0, 1.0})
      EXPECT_LE(linearization_check(model(3), RadialWeight::canonical(), GraphSurface::slice(g, c), tests), 1e-8);
  }
}

TEST(Linearization, CentralSchemeApproachesContinuumAtSecondOrder) {
  // On the slice t = 0 of the model the linearized H~ is -Lap, and
  // -Lap cos(x) = cos(x) / 9 in the continuum.
  auto err = [](int res) {
    const auto g = grid2(res, DifferenceScheme::central);
    const auto phi = g.sample([](auto x) { return std::cos(x[0]); });
    const auto j = fd_jacobian(GraphSurface::slice(g, 0.0), model(3), RadialWeight::canonical(), phi);
    double e = 0;
    for (std::size_t p = 0; p < g.size(); ++p) e = std::max(e, std::abs(j[p] - phi[p] / 9.0));
    return e * 9.0;
  };
  const double e32 = err(32), e64 = err(64);
  EXPECT_NEAR(std::log2(e32 / e64), 2.0, 0.2);
}
