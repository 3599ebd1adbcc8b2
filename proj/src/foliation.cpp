#include "warprig/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "newton_support.hpp"

namespace warprig {

namespace {

std::string at_t(const char* what, double t) {
  std::ostringstream os;
  os.precision(17);
  os << what << " (leaf t = " << t << ")";
  return os.str();
}

void shift_to_mean(GraphSurface& s, double t) {
  const double delta = t - s.mean_height();
  for (double& r : s.rho) r += delta;
}

struct LeafState {
  GraphSurface surface;
  std::vector<double> htilde;
  double lambda = 0.0;
  double merit = 0.0;     // rms of the bordered residual
  double residual = 0.0;  // max |H~ - lambda|
};

bool evaluate(const GraphSurface& s, double lambda, const WarpedMetricSpec& spec, const RadialWeight& u,
              LeafState& st) {
  if (!s.in_chart()) return false;
  st.surface = s;
  st.lambda = lambda;
  st.htilde = detail::htilde_of(s.grid, s.rho, spec, u);
  double sq = 0.0;
  st.residual = 0.0;
  for (double h : st.htilde) {
    sq += (h - lambda) * (h - lambda);
    st.residual = std::max(st.residual, std::abs(h - lambda));
  }
  st.merit = std::sqrt(sq / static_cast<double>(st.htilde.size()));
  return true;
}

}  // namespace

FoliationLeaf solve_leaf(const WarpedMetricSpec& spec, const RadialWeight& u, double t, const GraphSurface& initial,
                         const SolveOptions& opts) {
  opts.validate();
  spec.validate();
  initial.validate();
  if (!std::isfinite(t)) throw std::invalid_argument("solve_leaf: non-finite target");
  const PeriodicGrid& grid = initial.grid;
  const std::size_t count = grid.size();

  GraphSurface start = initial;
  shift_to_mean(start, t);
  LeafState cur;
  if (!evaluate(start, 0.0, spec, u, cur)) throw ChartExit(at_t("solve_leaf: seed outside the chart", t));
  evaluate(start, grid.mean(cur.htilde), spec, u, cur);

  const int limit = opts.mode == SolveMode::newton ? opts.iteration_limit() : 50;
  int k = 0;
  for (;; ++k) {
    if (cur.residual <= opts.tolerance) break;
    if (k >= limit) {
      MinimizeResult best{cur.surface, weighted_area(cur.surface, spec, u), cur.residual, k, {}};
      throw NonConvergence(at_t("solve_leaf: Newton iteration budget exhausted", t), std::move(best));
    }
    const detail::HtildeJacobian jac(grid, cur.surface.rho, spec, u);
    const detail::FlatPreconditioner flat(grid, spec.warp(t));
    const auto bordered = [&](std::span<const double> v, std::span<double> out) {
      jac.apply(v.first(count), out.first(count));
      for (std::size_t p = 0; p < count; ++p) out[p] -= v[count];
      out[count] = grid.mean(v.first(count));
    };
    // Exact inverse of the bordered flat model [c K, -1; mean, 0].
    std::vector<double> centered(count);
    const auto precondition = [&](std::span<const double> r, std::span<double> x) {
      const double m = grid.mean(r.first(count));
      for (std::size_t p = 0; p < count; ++p) centered[p] = r[p] - m;
      flat.apply(centered, x.first(count));
      for (std::size_t p = 0; p < count; ++p) x[p] += r[count];
      x[count] = -m;
    };
    std::vector<double> rhs(count + 1, 0.0), step(count + 1, 0.0);
    for (std::size_t p = 0; p < count; ++p) rhs[p] = cur.lambda - cur.htilde[p];
    const double eta = std::clamp(cur.residual, opts.krylov_tolerance, 1e-4);
    const auto kr = linalg::gmres(bordered, precondition, rhs, step, eta, opts.krylov_max_iterations);
    if (kr.relative_residual > 0.5)
      throw JacobianSingular(at_t("solve_leaf: bordered Jacobian system could not be solved", t));

    double alpha = opts.initial_step;
    LeafState next;
    bool accepted = false;
    while (alpha >= opts.min_step) {
      GraphSurface trial = cur.surface;
      for (std::size_t p = 0; p < count; ++p) trial.rho[p] += alpha * step[p];
      shift_to_mean(trial, t);
      if (evaluate(trial, cur.lambda + alpha * step[count], spec, u, next) &&
          next.merit < (1.0 - 1e-4 * alpha) * cur.merit) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      MinimizeResult best{cur.surface, weighted_area(cur.surface, spec, u), cur.residual, k, {}};
      throw NonConvergence(at_t("solve_leaf: line search failed", t), std::move(best));
    }
    cur = std::move(next);
  }

  FoliationLeaf leaf;
  leaf.t = t;
  leaf.surface = cur.surface;
  leaf.lagrange = cur.lambda;
  leaf.htilde = grid.mean(cur.htilde);
  leaf.residual = cur.residual;
  leaf.energy = weighted_area(cur.surface, spec, u);
  leaf.iterations = k;
  return leaf;
}

namespace {

FoliationLeaf advance(const WarpedMetricSpec& spec, const RadialWeight& u, const FoliationLeaf& from, double target,
                      const SolveOptions& opts, int depth) {
  try {
    return solve_leaf(spec, u, target, from.surface, opts);
  } catch (const NonConvergence&) {
    if (depth >= 6) throw;
  } catch (const JacobianSingular&) {
    if (depth >= 6) throw;
  } catch (const ChartExit&) {
    if (depth >= 6) throw;
  }
  const FoliationLeaf mid = advance(spec, u, from, 0.5 * (from.t + target), opts, depth + 1);
  return advance(spec, u, mid, target, opts, depth + 1);
}

}  // namespace

FoliationResult build_foliation(const WarpedMetricSpec& spec, const RadialWeight& u, const PeriodicGrid& grid,
                                double t_min, double t_max, int steps, const SolveOptions& opts) {
  if (!(t_min <= t_max) || !std::isfinite(t_min) || !std::isfinite(t_max))
    throw std::invalid_argument("build_foliation: need a finite range with t_min <= t_max");
  if (steps < 1 || (steps == 1) != (t_min == t_max))
    throw std::invalid_argument("build_foliation: need steps >= 2 (or steps = 1 for a degenerate range)");
  std::vector<double> ts(steps);
  for (int k = 0; k < steps; ++k) ts[k] = steps == 1 ? t_min : t_min + (t_max - t_min) * k / (steps - 1.0);

  const double center = (t_min <= 0.0 && 0.0 <= t_max) ? 0.0 : 0.5 * (t_min + t_max);
  int k0 = 0;
  for (int k = 1; k < steps; ++k)
    if (std::abs(ts[k] - center) < std::abs(ts[k0] - center)) k0 = k;

  FoliationResult out;
  out.leaves.resize(steps);
  out.leaves[k0] = solve_leaf(spec, u, ts[k0], GraphSurface::slice(grid, ts[k0]), opts);
  for (int k = k0 + 1; k < steps; ++k) out.leaves[k] = advance(spec, u, out.leaves[k - 1], ts[k], opts, 0);
  for (int k = k0 - 1; k >= 0; --k) out.leaves[k] = advance(spec, u, out.leaves[k + 1], ts[k], opts, 0);

  // phi = <d_t Phi, nu> = (d rho / d t) / W.
  bool positive = true;
  for (int k = 0; k < steps; ++k) {
    std::vector<double> drho(grid.size(), 1.0);
    if (steps > 1) {
      const int lo = std::max(0, k - 1), hi = std::min(steps - 1, k + 1);
      const auto& a = out.leaves[lo].surface.rho;
      const auto& b = out.leaves[hi].surface.rho;
      for (std::size_t p = 0; p < drho.size(); ++p) drho[p] = (b[p] - a[p]) / (ts[hi] - ts[lo]);
    }
    const SurfaceGeometry geo = induced_geometry(out.leaves[k].surface, spec, u);
    std::vector<double>& phi = out.leaves[k].phi;
    phi.resize(drho.size());
    for (std::size_t p = 0; p < drho.size(); ++p) {
      phi[p] = drho[p] / geo.nodes[p].normal_factor;
      if (!(phi[p] > 0.0)) positive = false;
    }
    out.energies.push_back(out.leaves[k].energy);
  }
  if (positive) out.psi = leaf_psi(out, spec, u);
  return out;
}

double linearization_check(const WarpedMetricSpec& spec, const RadialWeight& u, const GraphSurface& surface,
                           const std::vector<std::vector<double>>& test_functions) {
  const SurfaceGeometry geo = induced_geometry(surface, spec, u);
  const detail::HtildeJacobian jac(surface.grid, surface.rho, spec, u);
  double worst = 0.0;
  std::vector<double> jphi(surface.grid.size());
  for (const auto& phi : test_functions) {
    const std::vector<double> lap = laplace_beltrami(geo, phi);
    jac.apply(graph_displacement(geo, phi), jphi);
    double dev = 0.0;
    for (std::size_t p = 0; p < lap.size(); ++p) dev = std::max(dev, std::abs(jphi[p] + lap[p]));
    const double ref = detail::max_abs(lap);
    const double size = detail::max_abs(phi);
    const double scale = ref > 1e-12 * size ? ref : (size > 0.0 ? size : 1.0);
    worst = std::max(worst, dev / scale);
  }
  return worst;
}

std::vector<double> leaf_psi(const FoliationResult& foliation, const WarpedMetricSpec& spec, const RadialWeight& u) {
  std::vector<double> psi;
  for (const FoliationLeaf& leaf : foliation.leaves) {
    if (leaf.phi.size() != leaf.surface.grid.size())
      throw std::invalid_argument(at_t("leaf_psi: leaf has no normal speed", leaf.t));
    const SurfaceGeometry geo = induced_geometry(leaf.surface, spec, u);
    const std::vector<double> dA = geo.area_weights();
    double inv = 0.0, num = 0.0;
    for (std::size_t p = 0; p < dA.size(); ++p) {
      if (!(leaf.phi[p] > 0.0)) throw std::invalid_argument(at_t("leaf_psi: normal speed is not positive", leaf.t));
      inv += dA[p] / leaf.phi[p];
      num += (spec.n - 3.0) * geo.nodes[p].w_nu * dA[p];
    }
    psi.push_back(num / inv);
  }
  return psi;
}

namespace {

MonotonicityReport accumulate(const FoliationResult& foliation, std::vector<double> psi) {
  MonotonicityReport rep;
  const auto& leaves = foliation.leaves;
  const std::size_t m = leaves.size();
  rep.psi = std::move(psi);
  if (m == 0) return rep;
  for (const auto& l : leaves) rep.t.push_back(l.t);
  std::size_t k0 = 0;
  for (std::size_t k = 1; k < m; ++k)
    if (std::abs(rep.t[k]) < std::abs(rep.t[k0])) k0 = k;
  // integral of Psi from 0 to t_k by the trapezoid rule on the leaf grid
  std::vector<double> integral(m, 0.0);
  integral[k0] = rep.psi[k0] * rep.t[k0];
  for (std::size_t k = k0 + 1; k < m; ++k)
    integral[k] = integral[k - 1] + 0.5 * (rep.psi[k] + rep.psi[k - 1]) * (rep.t[k] - rep.t[k - 1]);
  for (std::size_t k = k0; k-- > 0;)
    integral[k] = integral[k + 1] - 0.5 * (rep.psi[k] + rep.psi[k + 1]) * (rep.t[k + 1] - rep.t[k]);
  for (std::size_t k = 0; k < m; ++k) rep.conserved.push_back(std::exp(integral[k]) * leaves[k].htilde);
  rep.max_violation = m > 1 ? -HUGE_VAL : 0.0;
  for (std::size_t k = 0; k + 1 < m; ++k)
    rep.max_violation =
        std::max(rep.max_violation, (rep.conserved[k + 1] - rep.conserved[k]) / (rep.t[k + 1] - rep.t[k]));
  return rep;
}

}  // namespace

MonotonicityReport monotonicity_report(const FoliationResult& foliation, const WarpedMetricSpec& spec,
                                       const RadialWeight& u) {
  return accumulate(foliation, leaf_psi(foliation, spec, u));
}

MonotonicityReport monotonicity_report(const FoliationResult& foliation, const std::function<double(double)>& psi) {
  std::vector<double> values;
  for (const auto& l : foliation.leaves) values.push_back(psi(l.t));
  return accumulate(foliation, std::move(values));
}

}  // namespace warprig
