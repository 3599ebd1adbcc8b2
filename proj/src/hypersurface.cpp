#include "warprig/hypersurface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace warprig {

namespace {

void check_compatible(const PeriodicGrid& grid, const WarpedMetricSpec& spec) {
  if (grid.dim() != spec.fiber.dim)
    throw std::invalid_argument("grid dimension " + std::to_string(grid.dim()) + " does not match fiber dimension " +
                                std::to_string(spec.fiber.dim));
  for (int a = 0; a < grid.dim(); ++a)
    if (std::abs(grid.period(a) - spec.fiber.periods[a]) > 1e-12 * spec.fiber.periods[a])
      throw std::invalid_argument("grid periods do not match the fiber periods");
}

void check_field(const PeriodicGrid& grid, std::span<const double> field, const char* what) {
  if (field.size() != grid.size()) throw std::invalid_argument(std::string(what) + ": field size mismatch");
}

Jet positive_weight(const RadialWeight& u, const WarpedMetricSpec& spec, double t) {
  const Jet j = u.jet(spec, t);
  if (!(j.value > 0.0) || !std::isfinite(j.value))
    throw std::invalid_argument("weight must be positive on the surface");
  return j;
}

}  // namespace

GraphSurface GraphSurface::slice(const PeriodicGrid& grid, double height) {
  return GraphSurface{grid, std::vector<double>(grid.size(), height)};
}

bool GraphSurface::in_chart() const {
  if (rho.size() != grid.size()) return false;
  for (double r : rho)
    if (!std::isfinite(r)) return false;
  const double m = mean_height();
  for (double r : rho)
    if (std::abs(r - m) >= std::numbers::pi) return false;
  return true;
}

void GraphSurface::validate() const {
  if (rho.size() != grid.size()) throw std::invalid_argument("GraphSurface: rho size does not match the grid");
  for (double r : rho)
    if (!std::isfinite(r)) throw std::invalid_argument("GraphSurface: non-finite height");
  if (!in_chart()) throw ChartExit("GraphSurface: surface left the chart (max |rho - mean| >= pi)");
}

std::vector<double> SurfaceGeometry::area_weights() const {
  std::vector<double> w(nodes.size());
  const double cell = grid.cell_volume();
  for (std::size_t p = 0; p < nodes.size(); ++p) w[p] = nodes[p].area_element * cell;
  return w;
}

std::vector<double> SurfaceGeometry::htilde() const {
  std::vector<double> h(nodes.size());
  for (std::size_t p = 0; p < nodes.size(); ++p) h[p] = nodes[p].htilde;
  return h;
}

double SurfaceGeometry::max_abs_htilde() const {
  double m = 0.0;
  for (const auto& nd : nodes) m = std::max(m, std::abs(nd.htilde));
  return m;
}

double SurfaceGeometry::area() const {
  double s = 0.0;
  for (double w : area_weights()) s += w;
  return s;
}

SurfaceGeometry induced_geometry(const GraphSurface& surface, const WarpedMetricSpec& spec, const RadialWeight& u) {
  spec.validate();
  surface.validate();
  const PeriodicGrid& grid = surface.grid;
  check_compatible(grid, spec);
  const int d = grid.dim();
  const std::size_t count = grid.size();

  std::vector<std::vector<double>> g(d), h(d * d);
  for (int a = 0; a < d; ++a) g[a] = grid.derivative(surface.rho, a);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      h[a * d + b] = grid.derivative(g[b], a);
      if (b != a) h[b * d + a] = h[a * d + b];
    }

  SurfaceGeometry geo{grid, spec.n, spec.gamma, std::vector<NodeGeometry>(count)};
  const double gamma = spec.gamma;
  for (std::size_t p = 0; p < count; ++p) {
    NodeGeometry& nd = geo.nodes[p];
    const double t = surface.rho[p];
    const Jet f = spec.warp.jet(t);
    const Jet uj = positive_weight(u, spec, t);
    const double f2 = f.value * f.value;
    const double fp_f = f.d1 / f.value;

    SmallVector grad(d);
    SmallMatrix hess(d, d);
    for (int a = 0; a < d; ++a) {
      grad[a] = g[a][p];
      for (int b = 0; b < d; ++b) hess(a, b) = h[a * d + b][p];
    }
    const double grad_sq = grad.squaredNorm();
    const SmallMatrix id = SmallMatrix::Identity(d, d);

    nd.grad_rho = grad;
    nd.metric = f2 * id + grad * grad.transpose();
    nd.metric_inv = (id - grad * grad.transpose() / (f2 + grad_sq)) / f2;
    nd.normal_factor = std::sqrt(1.0 + grad_sq / f2);
    const double W = nd.normal_factor;
    nd.area_element = std::pow(f.value, d) * W;
    nd.normal_t = 1.0 / W;
    nd.normal_fiber = -grad / (f2 * W);

    nd.second_form = (-hess + f.value * f.d1 * id + 2.0 * fp_f * grad * grad.transpose()) / W;
    const SmallMatrix shape = nd.metric_inv * nd.second_form;
    nd.mean_curvature = shape.trace();
    nd.second_form_sq = (shape * shape).trace();

    nd.warp = f;
    nd.weight = uj;
    const double tang = 1.0 - 1.0 / (W * W);  // |fiber part of nu|^2
    nd.u_nu = uj.d1 / W;
    nd.grad_u = uj.d1 * grad;
    nd.grad_u_tangential_sq = uj.d1 * uj.d1 * grad.dot(nd.metric_inv * grad);
    nd.grad_u_sq = uj.d1 * uj.d1;
    nd.w = std::log(uj.value);
    nd.w_nu = nd.u_nu / uj.value;
    nd.grad_w = (uj.d1 / uj.value) * grad;

    const CurvatureProfile c = curvature_profile(spec, t);
    nd.ric_nu = c.ric_tt / (W * W) + fiber_ricci_eigenvalue(spec, t) * tang;
    nd.hess_u_nu = uj.d2 / (W * W) + fp_f * uj.d1 * tang;
    nd.lap_u = radial_laplacian(spec, uj, t);
    nd.ambient_scalar = c.scalar;
    nd.htilde = nd.mean_curvature + gamma * nd.w_nu;
  }
  return geo;
}

double weighted_area(const GraphSurface& surface, const WarpedMetricSpec& spec, const RadialWeight& u) {
  spec.validate();
  surface.validate();
  const PeriodicGrid& grid = surface.grid;
  check_compatible(grid, spec);
  const int d = grid.dim();
  std::vector<std::vector<double>> g(d);
  for (int a = 0; a < d; ++a) g[a] = grid.derivative(surface.rho, a);
  double sum = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const double t = surface.rho[p];
    const double f = spec.warp(t);
    double grad_sq = 0.0;
    for (int a = 0; a < d; ++a) grad_sq += g[a][p] * g[a][p];
    const double uv = positive_weight(u, spec, t).value;
    sum += std::pow(uv, spec.gamma) * std::pow(f, d) * std::sqrt(1.0 + grad_sq / (f * f));
  }
  return sum * grid.cell_volume();
}

std::vector<double> weighted_mean_curvature(const GraphSurface& surface, const WarpedMetricSpec& spec,
                                            const RadialWeight& u) {
  return induced_geometry(surface, spec, u).htilde();
}

VariationField VariationField::from_normal_speed(const SurfaceGeometry& geometry, std::vector<double> phi) {
  check_field(geometry.grid, phi, "VariationField");
  VariationField v{std::move(phi), {}};
  v.psi.resize(v.phi.size());
  for (std::size_t p = 0; p < v.phi.size(); ++p)
    v.psi[p] = v.phi[p] * std::pow(geometry.nodes[p].weight.value, 0.5 * geometry.gamma);
  return v;
}

std::vector<double> graph_displacement(const SurfaceGeometry& geometry, std::span<const double> phi) {
  check_field(geometry.grid, phi, "graph_displacement");
  std::vector<double> out(phi.size());
  for (std::size_t p = 0; p < phi.size(); ++p) out[p] = phi[p] * geometry.nodes[p].normal_factor;
  return out;
}

double first_variation(const SurfaceGeometry& geometry, const VariationField& field) {
  check_field(geometry.grid, field.phi, "first_variation");
  const double cell = geometry.grid.cell_volume();
  double sum = 0.0;
  for (std::size_t p = 0; p < geometry.nodes.size(); ++p) {
    const NodeGeometry& nd = geometry.nodes[p];
    sum += nd.htilde * field.phi[p] * std::pow(nd.weight.value, geometry.gamma) * nd.area_element;
  }
  return sum * cell;
}

double first_variation(const GraphSurface& surface, const WarpedMetricSpec& spec, const RadialWeight& u,
                       std::span<const double> phi) {
  const SurfaceGeometry geo = induced_geometry(surface, spec, u);
  return first_variation(geo, VariationField::from_normal_speed(geo, {phi.begin(), phi.end()}));
}

SecondVariation second_variation(const SurfaceGeometry& geometry, const VariationField& field,
                                 double minimality_threshold) {
  check_field(geometry.grid, field.phi, "second_variation");
  check_field(geometry.grid, field.psi, "second_variation");
  const PeriodicGrid& grid = geometry.grid;
  const int d = grid.dim();
  const double gamma = geometry.gamma;
  const std::vector<double> dA = geometry.area_weights();
  const std::vector<double> lap_phi = laplace_beltrami(geometry, field.phi);
  std::vector<std::vector<double>> dphi(d);
  for (int a = 0; a < d; ++a) dphi[a] = grid.derivative(field.phi, a);

  SecondVariation out;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const NodeGeometry& nd = geometry.nodes[p];
    const double phi = field.phi[p];
    const double uval = nd.weight.value;
    SmallVector gp(d);
    for (int a = 0; a < d; ++a) gp[a] = dphi[a][p];
    const double grad_u_dot_grad_phi = nd.grad_u.dot(nd.metric_inv * gp);
    const double bracket = -lap_phi[p] - nd.second_form_sq * phi - nd.ric_nu * phi -
                           gamma * nd.u_nu * nd.u_nu / (uval * uval) * phi +
                           gamma / uval * phi * nd.hess_u_nu - gamma / uval * grad_u_dot_grad_phi;
    out.raw += bracket * std::pow(uval, gamma) * phi * dA[p];
  }
  out.rewritten = jacobi_form(geometry).energy(field.psi);
  out.minimal_advisory = geometry.max_abs_htilde() > minimality_threshold;
  return out;
}

SecondVariation second_variation(const GraphSurface& surface, const WarpedMetricSpec& spec, const RadialWeight& u,
                                 std::span<const double> phi, double minimality_threshold) {
  const SurfaceGeometry geo = induced_geometry(surface, spec, u);
  return second_variation(geo, VariationField::from_normal_speed(geo, {phi.begin(), phi.end()}),
                          minimality_threshold);
}

void QuadraticForm::apply(std::span<const double> v, std::span<double> out) const {
  const int d = grid.dim();
  const std::size_t count = grid.size();
  if (v.size() != count || out.size() != count) throw std::invalid_argument("QuadraticForm::apply: size mismatch");
  std::vector<std::vector<double>> dv(d);
  for (int a = 0; a < d; ++a) dv[a] = grid.derivative(v, a);
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> y(count), tmp(count);
  for (int a = 0; a < d; ++a) {
    for (std::size_t p = 0; p < count; ++p) {
      double s = 0.0;
      for (int b = 0; b < d; ++b) s += stiffness[p](a, b) * dv[b][p];
      if (!drift.empty()) s += drift[p][a] * v[p];
      y[p] = s;
    }
    // D^T = -D for both schemes.
    grid.differentiate(y, a, tmp);
    for (std::size_t p = 0; p < count; ++p) out[p] -= tmp[p];
  }
  if (!drift.empty())
    for (std::size_t p = 0; p < count; ++p)
      for (int b = 0; b < d; ++b) out[p] += drift[p][b] * dv[b][p];
  if (!potential.empty())
    for (std::size_t p = 0; p < count; ++p) out[p] += potential[p] * v[p];
  for (int a = 0; a < d; ++a) {
    const double k2 = grid.nyquist_wavenumber_sq(a);
    if (k2 == 0.0) continue;
    grid.nyquist_component(v, a, y);
    for (std::size_t p = 0; p < count; ++p) y[p] *= stiffness[p](a, a);
    grid.nyquist_component(y, a, tmp);
    for (std::size_t p = 0; p < count; ++p) out[p] += k2 * tmp[p];
  }
}

double QuadraticForm::energy(std::span<const double> v) const {
  std::vector<double> kv(v.size());
  apply(v, kv);
  double s = 0.0;
  for (std::size_t p = 0; p < v.size(); ++p) s += v[p] * kv[p];
  return s;
}

Eigen::MatrixXd QuadraticForm::assemble() const {
  const int d = grid.dim();
  const std::size_t count = grid.size();
  if (count > 4096) throw std::invalid_argument("QuadraticForm::assemble: more than 4096 nodes");
  const auto nc = static_cast<Eigen::Index>(count);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(nc, nc);
  auto moved = [&](std::size_t p, int axis, int m) {
    return static_cast<Eigen::Index>(p + (static_cast<std::ptrdiff_t>(m) - grid.index(p, axis)) *
                                             static_cast<std::ptrdiff_t>(grid.stride(axis)));
  };
  for (std::size_t p = 0; p < count; ++p) {
    for (int a = 0; a < d; ++a) {
      const Eigen::MatrixXd& da = grid.diff_matrix(a);
      const int pa = grid.index(p, a);
      for (int b = 0; b < d; ++b) {
        const double c = stiffness[p](a, b);
        if (c == 0.0) continue;
        const Eigen::MatrixXd& db = grid.diff_matrix(b);
        const int pb = grid.index(p, b);
        for (int i = 0; i < grid.resolution(a); ++i) {
          const double left = da(pa, i) * c;
          if (left == 0.0) continue;
          const Eigen::Index r = moved(p, a, i);
          for (int j = 0; j < grid.resolution(b); ++j) s(r, moved(p, b, j)) += left * db(pb, j);
        }
      }
      const double k2 = grid.nyquist_wavenumber_sq(a);
      if (k2 != 0.0) {
        const int na = grid.resolution(a);
        const double c = k2 * stiffness[p](a, a) / (static_cast<double>(na) * na);
        for (int i = 0; i < na; ++i)
          for (int j = 0; j < na; ++j)
            s(moved(p, a, i), moved(p, a, j)) += ((i + j) % 2 == 0 ? c : -c);
      }
      if (!drift.empty() && drift[p][a] != 0.0) {
        const auto pi = static_cast<Eigen::Index>(p);
        for (int j = 0; j < grid.resolution(a); ++j) {
          const double e = drift[p][a] * da(pa, j);
          const Eigen::Index q = moved(p, a, j);
          s(pi, q) += e;
          s(q, pi) += e;
        }
      }
    }
    if (!potential.empty()) s(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) += potential[p];
  }
  return s;
}

QuadraticForm dirichlet_form(const SurfaceGeometry& geometry) {
  QuadraticForm q{geometry.grid, {}, {}, {}, geometry.area_weights()};
  q.stiffness.reserve(geometry.nodes.size());
  for (std::size_t p = 0; p < geometry.nodes.size(); ++p)
    q.stiffness.push_back(q.mass[p] * geometry.nodes[p].metric_inv);
  return q;
}

std::vector<double> stability_potential(const SurfaceGeometry& geometry) {
  const double g = geometry.gamma;
  std::vector<double> v(geometry.nodes.size());
  for (std::size_t p = 0; p < v.size(); ++p) {
    const NodeGeometry& nd = geometry.nodes[p];
    const double grad_w_sq = nd.grad_w.dot(nd.metric_inv * nd.grad_w);
    v[p] = g * nd.lap_u / nd.weight.value - nd.second_form_sq - nd.ric_nu - g * nd.mean_curvature * nd.w_nu -
           g * nd.w_nu * nd.w_nu + (0.25 * g * g - g) * grad_w_sq;
  }
  return v;
}

QuadraticForm jacobi_form(const SurfaceGeometry& geometry) {
  QuadraticForm q = dirichlet_form(geometry);
  const std::vector<double> v0 = stability_potential(geometry);
  q.drift.reserve(v0.size());
  q.potential.resize(v0.size());
  for (std::size_t p = 0; p < v0.size(); ++p) {
    const NodeGeometry& nd = geometry.nodes[p];
    q.drift.push_back(0.5 * geometry.gamma * q.mass[p] * (nd.metric_inv * nd.grad_w));
    q.potential[p] = q.mass[p] * v0[p];
  }
  return q;
}

std::vector<double> laplace_beltrami(const SurfaceGeometry& geometry, std::span<const double> field) {
  check_field(geometry.grid, field, "laplace_beltrami");
  const QuadraticForm q = dirichlet_form(geometry);
  std::vector<double> out(field.size());
  q.apply(field, out);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = -out[p] / q.mass[p];
  return out;
}

}  // namespace warprig
