#include <algorithm>
#include <cmath>

#include "newton_support.hpp"
#include "warprig/minimize_stability.hpp"

namespace warprig {

int SolveOptions::iteration_limit() const {
  if (max_iterations > 0) return max_iterations;
  return mode == SolveMode::newton ? 50 : 500;
}

void SolveOptions::validate() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("SolveOptions: tolerance must be positive");
  if (max_iterations < 0) throw std::invalid_argument("SolveOptions: max_iterations must be >= 1 (or 0 for default)");
  if (!(initial_step > 0.0) || !(min_step > 0.0) || min_step > initial_step)
    throw std::invalid_argument("SolveOptions: need 0 < min_step <= initial_step");
  if (!(krylov_tolerance > 0.0) || krylov_max_iterations < 1)
    throw std::invalid_argument("SolveOptions: bad Krylov settings");
}

namespace {

struct Iterate {
  GraphSurface surface;
  std::vector<double> htilde;
  double energy = 0.0;
  double residual = 0.0;
};

// Returns false if rho leaves the chart.
bool evaluate(const GraphSurface& s, const WarpedMetricSpec& spec, const RadialWeight& u, Iterate& it) {
  if (!s.in_chart()) return false;
  it.surface = s;
  it.htilde = detail::htilde_of(s.grid, s.rho, spec, u);
  it.energy = weighted_area(s, spec, u);
  it.residual = detail::max_abs(it.htilde);
  return true;
}

MinimizeResult snapshot(const Iterate& it, int iterations, std::vector<SolveTraceEntry> trace) {
  return MinimizeResult{it.surface, it.energy, it.residual, iterations, std::move(trace)};
}

MinimizeResult newton(const GraphSurface& initial, const WarpedMetricSpec& spec, const RadialWeight& u,
                      const SolveOptions& opts) {
  const PeriodicGrid& grid = initial.grid;
  Iterate cur;
  if (!evaluate(initial, spec, u, cur)) throw ChartExit("minimize_weighted_area: initial surface outside the chart");
  std::vector<SolveTraceEntry> trace{{0, cur.energy, cur.residual}};
  const int limit = opts.iteration_limit();
  for (int k = 1; k <= limit + 1; ++k) {
    if (cur.residual <= opts.tolerance) return snapshot(cur, k - 1, std::move(trace));
    if (k > limit) break;

    const detail::HtildeJacobian jac(grid, cur.surface.rho, spec, u);
    const detail::FlatPreconditioner prec(grid, spec.warp(cur.surface.mean_height()));
    std::vector<double> rhs(cur.htilde.size()), step(cur.htilde.size(), 0.0);
    for (std::size_t p = 0; p < rhs.size(); ++p) rhs[p] = -cur.htilde[p];
    const double eta = std::clamp(cur.residual, opts.krylov_tolerance, 1e-4);
    const auto kr = linalg::gmres([&](auto x, auto y) { jac.apply(x, y); },
                                  [&](auto x, auto y) { prec.apply(x, y); }, rhs, step, eta,
                                  opts.krylov_max_iterations);
    if (kr.relative_residual > 0.5)
      throw NonConvergence("minimize_weighted_area: Newton direction could not be computed",
                           snapshot(cur, k - 1, trace));

    const double merit = detail::rms(cur.htilde);
    double alpha = opts.initial_step;
    Iterate next;
    bool accepted = false;
    while (alpha >= opts.min_step) {
      GraphSurface trial = cur.surface;
      for (std::size_t p = 0; p < step.size(); ++p) trial.rho[p] += alpha * step[p];
      if (evaluate(trial, spec, u, next) && detail::rms(next.htilde) < (1.0 - 1e-4 * alpha) * merit) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (!cur.surface.in_chart()) throw ChartExit("minimize_weighted_area: surface left the chart");
      throw NonConvergence("minimize_weighted_area: line search failed", snapshot(cur, k - 1, trace));
    }
    cur = std::move(next);
    trace.push_back({k, cur.energy, cur.residual});
  }
  throw NonConvergence("minimize_weighted_area: Newton iteration budget exhausted", snapshot(cur, limit, trace));
}

// Energy gradient w.r.t. nodal heights, normalized by a positive constant.
std::vector<double> energy_gradient(const SurfaceGeometry& geo) {
  std::vector<double> g(geo.nodes.size());
  const int d = geo.grid.dim();
  for (std::size_t p = 0; p < g.size(); ++p) {
    const NodeGeometry& nd = geo.nodes[p];
    g[p] = nd.htilde * std::pow(nd.weight.value, geo.gamma) * std::pow(nd.warp.value, d);
  }
  return g;
}

MinimizeResult gradient_flow(const GraphSurface& initial, const WarpedMetricSpec& spec, const RadialWeight& u,
                             const SolveOptions& opts) {
  const PeriodicGrid& grid = initial.grid;
  Iterate cur;
  if (!evaluate(initial, spec, u, cur)) throw ChartExit("minimize_weighted_area: initial surface outside the chart");
  std::vector<SolveTraceEntry> trace{{0, cur.energy, cur.residual}};
  const int limit = opts.iteration_limit();
  double alpha = opts.initial_step;
  for (int k = 1; k <= limit + 1; ++k) {
    if (cur.residual <= opts.tolerance) return snapshot(cur, k - 1, std::move(trace));
    if (k > limit) break;

    const SurfaceGeometry geo = induced_geometry(cur.surface, spec, u);
    std::vector<double> g = energy_gradient(geo);
    const double m = cur.surface.mean_height();
    const double norm = std::pow(u(spec, m), spec.gamma) * std::pow(spec.warp(m), grid.dim());
    for (double& v : g) v /= norm;
    std::vector<double> dir(g.size());
    const double f = spec.warp(m);
    grid.apply_flat_inverse(g, 1.0 / (f * f), 1.0, dir);

    Iterate next;
    bool accepted = false;
    while (alpha >= opts.min_step) {
      GraphSurface trial = cur.surface;
      for (std::size_t p = 0; p < dir.size(); ++p) trial.rho[p] -= alpha * dir[p];
      if (evaluate(trial, spec, u, next) && next.energy <= cur.energy + 1e-12) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) throw NonConvergence("minimize_weighted_area: no energy-decreasing step", snapshot(cur, k - 1, trace));
    cur = std::move(next);
    trace.push_back({k, cur.energy, cur.residual});
    alpha = std::min(opts.initial_step, 2.0 * alpha);
  }
  throw NonConvergence("minimize_weighted_area: flow iteration budget exhausted", snapshot(cur, limit, trace));
}

}  // namespace

MinimizeResult minimize_weighted_area(const GraphSurface& initial, const WarpedMetricSpec& spec,
                                      const RadialWeight& u, const SolveOptions& opts) {
  opts.validate();
  spec.validate();
  initial.validate();
  return opts.mode == SolveMode::newton ? newton(initial, spec, u, opts) : gradient_flow(initial, spec, u, opts);
}

}  // namespace warprig
