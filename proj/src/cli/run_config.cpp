#include "warprig/cli/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "warprig/ambient_oracle.hpp"
#include "warprig/surface_io.hpp"

#ifndef WARPRIG_VERSION
#define WARPRIG_VERSION "dev"
#endif

namespace warprig::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Context {
  const ExperimentConfig& cfg;
  double scale;
  RunReport& report;

  void check(const std::string& name, double value, const std::string& tolerance_key) {
    report.add_check(name, value, scale * cfg.tolerance(tolerance_key));
  }
};

json rigidity_json(const RigidityReport& r) {
  return {{"umbilicity_residual", r.umbilicity_residual},
          {"tangential_w_residual", r.tangential_w_residual},
          {"spectral_equality_residual", r.spectral_equality_residual},
          {"htilde_residual", r.htilde_residual}};
}

Table trace_table(const std::vector<SolveTraceEntry>& trace) {
  Table t{{"iteration", "energy", "residual"}, {}};
  for (const auto& e : trace) t.rows.push_back({static_cast<double>(e.iteration), e.energy, e.residual});
  return t;
}

Table geometry_table(const SurfaceGeometry& geo, const GraphSurface& s) {
  Table t;
  for (int a = 0; a < geo.grid.dim(); ++a) t.columns.push_back("x" + std::to_string(a + 1));
  for (const char* c : {"rho", "area_element", "normal_factor", "mean_curvature", "second_form_sq", "u", "u_nu",
                        "w_nu", "htilde"})
    t.columns.push_back(c);
  for (std::size_t p = 0; p < geo.nodes.size(); ++p) {
    const NodeGeometry& nd = geo.nodes[p];
    std::vector<double> row;
    for (int a = 0; a < geo.grid.dim(); ++a) row.push_back(geo.grid.coordinate(p, a));
    for (double v : {s.rho[p], nd.area_element, nd.normal_factor, nd.mean_curvature, nd.second_form_sq,
                     nd.weight.value, nd.u_nu, nd.w_nu, nd.htilde})
      row.push_back(v);
    t.rows.push_back(std::move(row));
  }
  return t;
}

double slice_deviation(const GraphSurface& s) {
  const double m = s.mean_height();
  double dev = 0.0;
  for (double r : s.rho) dev = std::max(dev, std::abs(r - m));
  return dev;
}

void run_verify(Context& ctx, const VerifyParams& p) {
  const auto& cfg = ctx.cfg;
  const double sc = cfg.spec.fiber.scalar_curvature;
  double worst_ricci = 0.0, worst_scalar = sc == 0.0 ? 0.0 : kNaN;
  json per = json::object();
  for (int n : p.dimensions) {
    const std::vector<double> periods =
        n == cfg.spec.n ? cfg.spec.fiber.periods : std::vector<double>(n - 1, 2.0 * std::numbers::pi);
    const WarpedMetricSpec spec = WarpedMetricSpec::make(n, cfg.spec.warp, periods, sc);
    Table t{{"t", "residual_ricci", "residual_scalar"}, {}};
    double mr = 0.0, ms = sc == 0.0 ? 0.0 : kNaN;
    for (int k = 0; k < p.samples; ++k) {
      const double tk = 2.0 * std::numbers::pi * k / p.samples;
      const double rr = identity_residual_ricci(spec, tk);
      const double rs = sc == 0.0 ? identity_residual_scalar(spec, tk) : kNaN;
      mr = std::max(mr, std::abs(rr));
      if (sc == 0.0) ms = std::max(ms, std::abs(rs));
      t.rows.push_back({tk, rr, rs});
    }
    worst_ricci = std::max(worst_ricci, mr);
    if (sc == 0.0) worst_scalar = std::max(worst_scalar, ms);
    per[std::to_string(n)] = {{"max_residual_ricci", mr}, {"max_residual_scalar", sc == 0.0 ? json(ms) : json()}};
    ctx.report.tables["identities_n" + std::to_string(n)] = std::move(t);
  }
  ctx.report.results = {{"max_residual_ricci", worst_ricci},
                        {"max_residual_scalar", sc == 0.0 ? json(worst_scalar) : json()},
                        {"per_dimension", per},
                        {"samples", p.samples}};
  ctx.check("identity_residual_ricci", worst_ricci, "identity_residual");
  if (sc == 0.0) ctx.check("identity_residual_scalar", worst_scalar, "identity_residual");
}

void run_curvature(Context& ctx, const CurvatureParams& p) {
  const WarpedMetricSpec& spec = ctx.cfg.spec;
  const RadialWeight u = ctx.cfg.weight();
  const double sc = spec.fiber.scalar_curvature;
  Table t{{"t", "ric_tt", "ric_fiber", "scalar", "oracle_ric_tt", "oracle_ric_fiber", "oracle_scalar",
           "margin_ricci", "margin_scalar"},
          {}};
  double worst = 0.0;
  for (int k = 0; k < p.samples; ++k) {
    const double tk = 2.0 * std::numbers::pi * k / p.samples;
    const CurvatureProfile c = curvature_profile(spec, tk);
    const double f = spec.warp(tk);
    const oracle::OracleCurvature o =
        oracle::curvature_fd_richardson(spec, {tk, std::vector<double>(spec.fiber.dim, 0.0)}, p.step);
    // The oracle sees a flat fiber; compare against the flat part of the profile.
    const double flat_scalar = c.scalar - sc / (f * f);
    const double o_fiber = o.ricci(1, 1) / (f * f);
    worst = std::max({worst, std::abs(o.ricci(0, 0) - c.ric_tt), std::abs(o_fiber - c.ric_fiber_coeff),
                      std::abs(o.scalar - flat_scalar)});
    const double m_r = spectral_condition_margin(spec, u, tk, SpectralKind::ricci);
    const double m_s = (spec.n >= 4 && sc == 0.0) ? spectral_condition_margin(spec, u, tk, SpectralKind::scalar) : kNaN;
    t.rows.push_back({tk, c.ric_tt, c.ric_fiber_coeff, c.scalar, o.ricci(0, 0), o_fiber, o.scalar, m_r, m_s});
  }
  ctx.report.tables["curvature"] = std::move(t);
  ctx.report.results = {{"max_oracle_deviation", worst}, {"samples", p.samples}, {"step", p.step}};
  ctx.check("oracle_deviation", worst, "oracle_deviation");
}

MinimizeResult minimize_from(const ExperimentConfig& cfg, const SurfaceInit& init, const SolveOptions& opts) {
  return minimize_weighted_area(init.build(cfg.grid()), cfg.spec, cfg.weight(), opts);
}

void run_minimize(Context& ctx, const MinimizeParams& p) {
  const auto& cfg = ctx.cfg;
  const MinimizeResult r = minimize_from(cfg, p.initial, p.solve);
  const SurfaceGeometry geo = induced_geometry(r.surface, cfg.spec, cfg.weight());
  const RigidityReport rig = rigidity_report(r.surface, cfg.spec, cfg.weight(), p.kind);
  const double dev = slice_deviation(r.surface);
  ctx.report.results = {{"energy", r.energy},
                        {"htilde_residual", r.residual},
                        {"iterations", r.iterations},
                        {"mean_height", r.surface.mean_height()},
                        {"slice_deviation", dev},
                        {"rigidity", rigidity_json(rig)}};
  ctx.check("htilde_residual", r.residual, "htilde_residual");
  if (p.expected_energy) {
    ctx.report.results["expected_energy"] = *p.expected_energy;
    ctx.check("energy", std::abs(r.energy - *p.expected_energy), "energy");
  }
  if (p.expect_slice) ctx.check("slice_deviation", dev, "slice_deviation");
  ctx.check("umbilicity", rig.umbilicity_residual, "umbilicity");
  ctx.check("tangential_w", rig.tangential_w_residual, "tangential_w");
  ctx.check("spectral_equality", rig.spectral_equality_residual, "spectral_equality");
  ctx.check("rigidity_htilde", rig.htilde_residual, "rigidity_htilde");
  ctx.report.tables["trace"] = trace_table(r.trace);
  ctx.report.tables["geometry"] = geometry_table(geo, r.surface);
  ctx.report.artifacts["surface.json"] = surface_snapshot_json(r.surface, {{"task", "minimize"}});
}

void run_spectrum(Context& ctx, const SpectrumParams& p) {
  const auto& cfg = ctx.cfg;
  const PeriodicGrid grid = cfg.grid();
  std::vector<double> values;
  if (p.op == "conformal_fiber") {
    values = conformal_operator_spectrum(cfg.spec, grid, p.k);
  } else {
    GraphSurface s = p.surface.build(grid);
    if (p.minimize_first) s = minimize_weighted_area(s, cfg.spec, cfg.weight(), p.solve).surface;
    const SurfaceGeometry geo = induced_geometry(s, cfg.spec, cfg.weight());
    if (p.op == "stability") {
      values = stability_spectrum(geo, p.k).eigenvalues;
      ctx.check("stability_lower_bound", std::max(0.0, -values.front()), "stability_lower_bound");
    } else {
      values = conformal_operator_spectrum(cfg.spec, geo, p.k);
    }
  }
  Table t{{"index", "eigenvalue"}, {}};
  for (std::size_t i = 0; i < values.size(); ++i) t.rows.push_back({static_cast<double>(i + 1), values[i]});
  ctx.report.tables["eigenvalues"] = std::move(t);
  ctx.report.results = {{"operator", p.op}, {"eigenvalues", values}};
  for (std::size_t i = 0; i < p.expected.size(); ++i) {
    const std::string name = "eigenvalue_" + std::to_string(i + 1);
    const double dev = std::abs(values[i] - p.expected[i]);
    if (p.expected_tolerance.empty())
      ctx.check(name, dev, "eigenvalue");
    else
      ctx.report.add_check(name, dev, ctx.scale * p.expected_tolerance[i]);
  }
  if (!p.expected.empty()) ctx.report.results["expected"] = p.expected;
}

void run_foliate(Context& ctx, const FoliateParams& p) {
  const auto& cfg = ctx.cfg;
  const PeriodicGrid grid = cfg.grid();
  const RadialWeight u = cfg.weight();
  const FoliationResult fol = build_foliation(cfg.spec, u, grid, -p.epsilon, p.epsilon, p.steps, p.solve);

  double mean_err = 0.0, constancy = 0.0, min_phi = HUGE_VAL, e_min = HUGE_VAL, e_max = -HUGE_VAL;
  double nonpositive = 0.0, min_gap = HUGE_VAL;
  for (std::size_t k = 0; k < fol.leaves.size(); ++k) {
    const FoliationLeaf& l = fol.leaves[k];
    mean_err = std::max(mean_err, std::abs(l.surface.mean_height() - l.t));
    constancy = std::max(constancy, l.residual);
    for (double v : l.phi) {
      min_phi = std::min(min_phi, v);
      if (!(v > 0.0)) nonpositive += 1.0;
    }
    e_min = std::min(e_min, l.energy);
    e_max = std::max(e_max, l.energy);
    if (k + 1 < fol.leaves.size())
      for (std::size_t q = 0; q < l.surface.rho.size(); ++q)
        min_gap = std::min(min_gap, fol.leaves[k + 1].surface.rho[q] - l.surface.rho[q]);
  }

  MonotonicityReport mono;
  double violation = kNaN;
  if (nonpositive == 0.0) {
    mono = monotonicity_report(fol, cfg.spec, u);
    double pmax = 0.0;
    for (double v : mono.conserved) pmax = std::max(pmax, std::abs(v));
    violation = std::max(0.0, mono.max_violation) / (1.0 + pmax);
  }

  Table t{{"t", "htilde", "energy", "psi"}, {}};
  for (std::size_t k = 0; k < fol.leaves.size(); ++k)
    t.rows.push_back({fol.leaves[k].t, fol.leaves[k].htilde, fol.leaves[k].energy,
                      fol.psi.empty() ? kNaN : fol.psi[k]});
  ctx.report.tables["leaves"] = std::move(t);

  json htildes = json::array();
  for (const auto& l : fol.leaves) htildes.push_back(l.htilde);
  ctx.report.results = {{"leaves", fol.leaves.size()},
                        {"epsilon", p.epsilon},
                        {"htilde", htildes},
                        {"energy_spread", e_max - e_min},
                        {"min_phi", min_phi},
                        {"min_leaf_gap", fol.leaves.size() > 1 ? json(min_gap) : json()},
                        {"max_violation", nonpositive == 0.0 ? json(mono.max_violation) : json()},
                        {"conserved", mono.conserved}};

  ctx.check("mean_constraint", mean_err, "mean_constraint");
  ctx.check("leaf_constancy", constancy, "leaf_constancy");
  ctx.check("phi_nonpositive", nonpositive, "phi_nonpositive");
  ctx.check("monotonicity", violation, "monotonicity");
  if (p.expect_constant_energy) ctx.check("energy_spread", e_max - e_min, "energy_spread");
  if (p.linearization) {
    const FoliationLeaf& center = *std::min_element(fol.leaves.begin(), fol.leaves.end(), [](const auto& a, const auto& b) {
      return std::abs(a.t) < std::abs(b.t);
    });
    std::vector<std::vector<double>> tests{std::vector<double>(grid.size(), 1.0)};
    for (int a = 0; a < grid.dim(); ++a)
      tests.push_back(grid.sample([&](std::span<const double> x) {
        return std::cos(2.0 * std::numbers::pi * x[a] / grid.period(a));
      }));
    const double dev = linearization_check(cfg.spec, u, center.surface, tests);
    ctx.report.results["linearization_deviation"] = dev;
    ctx.check("linearization", dev, "linearization");
  }
}

void run_rigidity(Context& ctx, const RigidityParams& p) {
  const auto& cfg = ctx.cfg;
  GraphSurface s = p.surface.build(cfg.grid());
  if (p.minimize_first) s = minimize_weighted_area(s, cfg.spec, cfg.weight(), p.solve).surface;
  const RigidityReport rig = rigidity_report(s, cfg.spec, cfg.weight(), p.kind);
  ctx.report.results = rigidity_json(rig);
  ctx.report.results["kind"] = p.kind == SpectralKind::ricci ? "ricci" : "scalar";
  ctx.check("umbilicity", rig.umbilicity_residual, "umbilicity");
  ctx.check("tangential_w", rig.tangential_w_residual, "tangential_w");
  ctx.check("spectral_equality", rig.spectral_equality_residual, "spectral_equality");
  ctx.check("htilde", rig.htilde_residual, "htilde");
  ctx.report.artifacts["surface.json"] = surface_snapshot_json(s, {{"task", "rigidity"}});
}

}  // namespace

RunReport run_config(const ExperimentConfig& config, double tolerance_scale) {
  if (!(tolerance_scale > 0.0) || !std::isfinite(tolerance_scale))
    throw std::invalid_argument("tolerance scale must be positive and finite");
  RunReport report;
  report.task = config.task;
  report.config_hash = config_hash(config);
  report.version = WARPRIG_VERSION;
  Context ctx{config, tolerance_scale, report};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, VerifyParams>) run_verify(ctx, p);
        if constexpr (std::is_same_v<T, CurvatureParams>) run_curvature(ctx, p);
        if constexpr (std::is_same_v<T, MinimizeParams>) run_minimize(ctx, p);
        if constexpr (std::is_same_v<T, SpectrumParams>) run_spectrum(ctx, p);
        if constexpr (std::is_same_v<T, FoliateParams>) run_foliate(ctx, p);
        if constexpr (std::is_same_v<T, RigidityParams>) run_rigidity(ctx, p);
      },
      config.params);
  return report;
}

}  // namespace warprig::cli
