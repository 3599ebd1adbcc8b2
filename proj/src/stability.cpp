#include <algorithm>
#include <cmath>
#include <string>

#include "warprig/linalg.hpp"
#include "warprig/minimize_stability.hpp"

namespace warprig {

namespace {

constexpr std::size_t kDenseLimit = 4096;

void fix_sign(std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best]) * (1.0 + 1e-9)) best = i;
  if (v[best] < 0.0)
    for (double& x : v) x = -x;
}

}  // namespace

StabilitySpectrum lowest_eigenpairs(const QuadraticForm& form, int k) {
  const std::size_t count = form.grid.size();
  if (k < 1 || static_cast<std::size_t>(k) > count) throw std::invalid_argument("eigenpair count out of range");
  StabilitySpectrum out;
  linalg::EigenPairs pairs;
  if (count <= kDenseLimit) {
    pairs = linalg::lowest_generalized_dense(form.assemble(), form.mass, k);
  } else {
    out.dense = false;
    // S + shift*M >= M by Cauchy-Schwarz on the drift term.
    const int d = form.grid.dim();
    double shift = 1.0, bound_v = 0.0, bound_q = 0.0, cbar = 0.0, mbar = 0.0;
    for (std::size_t p = 0; p < count; ++p) {
      const double m = form.mass[p];
      if (!form.potential.empty()) bound_v = std::max(bound_v, std::abs(form.potential[p]) / m);
      if (!form.drift.empty())
        bound_q = std::max(bound_q, form.drift[p].dot(form.stiffness[p].ldlt().solve(form.drift[p])) / m);
      cbar += form.stiffness[p].trace() / d;
      mbar += m;
    }
    shift += bound_v + bound_q;
    cbar /= static_cast<double>(count);
    mbar /= static_cast<double>(count);
    linalg::SubspaceOptions so;
    so.shift = shift;
    pairs = linalg::lowest_generalized_iterative(
        [&](auto x, auto y) { form.apply(x, y); }, form.mass, k,
        [&](auto r, auto x) { form.grid.apply_flat_inverse(r, cbar, shift * mbar, x); }, so);
  }
  out.eigenvalues = std::move(pairs.values);
  out.eigenfunctions = std::move(pairs.vectors);
  for (auto& v : out.eigenfunctions) fix_sign(v);
  return out;
}

StabilitySpectrum stability_spectrum(const SurfaceGeometry& geometry, int k, double minimality_threshold) {
  const double r = geometry.max_abs_htilde();
  if (r > minimality_threshold)
    throw std::invalid_argument("stability_spectrum: surface is not weighted minimal (max |H~| = " +
                                std::to_string(r) + ")");
  return lowest_eigenpairs(jacobi_form(geometry), k);
}

StabilitySpectrum stability_spectrum(const GraphSurface& surface, const WarpedMetricSpec& spec,
                                     const RadialWeight& u, int k, double minimality_threshold) {
  return stability_spectrum(induced_geometry(surface, spec, u), k, minimality_threshold);
}

RigidityReport rigidity_report(const GraphSurface& surface, const WarpedMetricSpec& spec, const RadialWeight& u,
                               SpectralKind kind) {
  if (kind == SpectralKind::scalar && spec.n < 4)
    throw std::invalid_argument("rigidity_report: scalar kind needs n >= 4");
  const SurfaceGeometry geo = induced_geometry(surface, spec, u);
  const double n = spec.n;
  const double g = spec.gamma;
  const int d = surface.grid.dim();
  RigidityReport rep;
  for (const NodeGeometry& nd : geo.nodes) {
    const SmallMatrix traceless = nd.metric_inv * (nd.second_form - (nd.mean_curvature / d) * nd.metric);
    rep.umbilicity_residual = std::max(rep.umbilicity_residual, std::sqrt(std::abs((traceless * traceless).trace())));
    rep.tangential_w_residual =
        std::max(rep.tangential_w_residual, std::sqrt(std::max(0.0, nd.grad_w.dot(nd.metric_inv * nd.grad_w))));
    rep.htilde_residual = std::max(rep.htilde_residual, std::abs(nd.htilde));

    const double drift = -g * nd.lap_u / nd.weight.value;
    const double grad_w_sq = nd.grad_u_sq / (nd.weight.value * nd.weight.value);
    const double lhs = kind == SpectralKind::ricci ? drift + nd.ric_nu : drift + 0.5 * nd.ambient_scalar;
    const double rhs = kind == SpectralKind::ricci ? (n - 1.0) * (n - 3.0) * grad_w_sq : 0.5 * g * (g - 3.0) * grad_w_sq;
    rep.spectral_equality_residual = std::max(rep.spectral_equality_residual, std::abs(lhs - rhs));
  }
  return rep;
}

namespace {

double conformal_coefficient(const WarpedMetricSpec& spec) {
  if (spec.n == 3)
    throw std::invalid_argument(
        "conformal_operator_spectrum: n = 3 is not allowed; the coefficient 2(n-2)/(n-3) is singular, the "
        "scalar-curvature argument needs 4 <= n <= 7");
  spec.validate();
  return 2.0 * (spec.n - 2.0) / (spec.n - 3.0);
}

}  // namespace

std::vector<double> conformal_operator_spectrum(const WarpedMetricSpec& spec, const PeriodicGrid& grid, int k) {
  const double a = conformal_coefficient(spec);
  if (grid.dim() != spec.fiber.dim) throw std::invalid_argument("conformal_operator_spectrum: grid/fiber mismatch");
  const double cell = grid.cell_volume();
  const int d = grid.dim();
  QuadraticForm q{grid, {}, {}, {}, std::vector<double>(grid.size(), cell)};
  q.stiffness.assign(grid.size(), SmallMatrix(a * cell * SmallMatrix::Identity(d, d)));
  q.potential.assign(grid.size(), 0.5 * spec.fiber.scalar_curvature * cell);
  return lowest_eigenpairs(q, k).eigenvalues;
}

std::vector<double> gauss_scalar_curvature(const SurfaceGeometry& geometry) {
  std::vector<double> sc(geometry.nodes.size());
  for (std::size_t p = 0; p < sc.size(); ++p) {
    const NodeGeometry& nd = geometry.nodes[p];
    sc[p] = nd.ambient_scalar - 2.0 * nd.ric_nu + nd.mean_curvature * nd.mean_curvature - nd.second_form_sq;
  }
  return sc;
}

std::vector<double> conformal_operator_spectrum(const WarpedMetricSpec& spec, const SurfaceGeometry& geometry,
                                                int k) {
  const double a = conformal_coefficient(spec);
  QuadraticForm q = dirichlet_form(geometry);
  const std::vector<double> sc = gauss_scalar_curvature(geometry);
  q.potential.resize(sc.size());
  for (std::size_t p = 0; p < sc.size(); ++p) {
    q.stiffness[p] *= a;
    q.potential[p] = 0.5 * sc[p] * q.mass[p];
  }
  return lowest_eigenpairs(q, k).eigenvalues;
}

}  // namespace warprig
