#pragma once

// Graph hypersurfaces t = rho(x) over the flat-torus fiber of a warped
// product, their induced geometry, and the weighted area functional
//   E(Sigma) = int_Sigma u^gamma dA
// with its first and second variations.
//
// Orientation: the unit normal has positive d_t component. The second
// fundamental form is A(X,Y) = <nabla_X nu, Y> and H = tr(I^{-1} A), so the
// slice t = c has H = (n-1) f'(c)/f(c).

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <vector>

#include "warprig/periodic_grid.hpp"
#include "warprig/warp_core.hpp"

namespace warprig {

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

/// The surface left the region where it is a graph inside one sheet of the
/// circle factor.
class ChartExit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphSurface {
  PeriodicGrid grid;
  std::vector<double> rho;

  static GraphSurface slice(const PeriodicGrid& grid, double height);
  template <class F>
  static GraphSurface from_function(const PeriodicGrid& grid, F&& fn) {
    return GraphSurface{grid, grid.sample(std::forward<F>(fn))};
  }

  double mean_height() const { return grid.mean(rho); }
  /// max |rho - mean(rho)| < pi and every height finite.
  bool in_chart() const;
  /// Throws ChartExit when out of chart, std::invalid_argument for a size
  /// mismatch or a non-finite height.
  void validate() const;
};

struct NodeGeometry {
  SmallVector grad_rho;      ///< coordinate derivatives d_a rho
  SmallMatrix metric;        ///< induced metric I_ab
  SmallMatrix metric_inv;
  SmallMatrix second_form;   ///< A_ab
  double area_element = 0;   ///< sqrt(det I)
  double normal_factor = 1;  ///< W = sqrt(1 + |d rho|^2 / f^2)
  double normal_t = 1;       ///< d_t component of nu
  SmallVector normal_fiber;  ///< fiber components of nu
  double mean_curvature = 0;
  double second_form_sq = 0;  ///< |A|^2
  Jet warp;                   ///< f at rho
  Jet weight;                 ///< u at rho
  double u_nu = 0;
  SmallVector grad_u;         ///< coordinate derivatives of u restricted to Sigma
  double grad_u_tangential_sq = 0;  ///< |grad_Sigma u|^2
  double grad_u_sq = 0;             ///< ambient |grad u|^2
  double w = 0;                     ///< log u
  double w_nu = 0;
  SmallVector grad_w;               ///< coordinate derivatives of w restricted to Sigma
  double ric_nu = 0;                ///< Ric(nu, nu)
  double hess_u_nu = 0;             ///< Hess u (nu, nu) = Lap_g u - Lap_Sigma u - H u_nu
  double lap_u = 0;                 ///< ambient Laplacian of u
  double ambient_scalar = 0;        ///< Sc_g at the node
  double htilde = 0;                ///< H + gamma w_nu
};

struct SurfaceGeometry {
  PeriodicGrid grid;
  int n = 3;
  double gamma = 2.0;
  std::vector<NodeGeometry> nodes;

  /// dA per node: sqrt(det I) times the parameter cell volume.
  std::vector<double> area_weights() const;
  std::vector<double> htilde() const;
  double max_abs_htilde() const;
  double area() const;
};

SurfaceGeometry induced_geometry(const GraphSurface& surface, const WarpedMetricSpec& spec, const RadialWeight& u);

/// Node quadrature of int u^gamma dA (uses first derivatives only).
double weighted_area(const GraphSurface& surface, const WarpedMetricSpec& spec, const RadialWeight& u);

std::vector<double> weighted_mean_curvature(const GraphSurface& surface, const WarpedMetricSpec& spec,
                                            const RadialWeight& u);

/// Normal speed phi and its weighted partner psi = phi u^(gamma/2).
struct VariationField {
  std::vector<double> phi;
  std::vector<double> psi;

  static VariationField from_normal_speed(const SurfaceGeometry& geometry, std::vector<double> phi);
};

/// Vertical displacement delta rho = phi W that moves the graph with normal speed phi.
std::vector<double> graph_displacement(const SurfaceGeometry& geometry, std::span<const double> phi);

double first_variation(const SurfaceGeometry& geometry, const VariationField& field);
double first_variation(const GraphSurface& surface, const WarpedMetricSpec& spec, const RadialWeight& u,
                       std::span<const double> phi);

struct SecondVariation {
  double raw = 0.0;        ///< quadrature of the phi form with ambient terms
  double rewritten = 0.0;  ///< the same form in psi = phi u^(gamma/2), w = log u
  bool minimal_advisory = false;  ///< set when the surface is not weighted minimal
};

SecondVariation second_variation(const SurfaceGeometry& geometry, const VariationField& field,
                                 double minimality_threshold = 1e-6);
SecondVariation second_variation(const GraphSurface& surface, const WarpedMetricSpec& spec, const RadialWeight& u,
                                 std::span<const double> phi, double minimality_threshold = 1e-6);

/// Divergence-form quadratic form on nodal fields
///   Q(v) = sum_p [ sum_ab c_ab dv_a dv_b + 2 v q_b dv_b + V v^2 ]
/// plus the closure term for the alternating (Nyquist) mode. The matching
/// operator is symmetric with respect to the plain Euclidean product; divide
/// by `mass` to get the operator acting on functions.
struct QuadraticForm {
  PeriodicGrid grid;
  std::vector<SmallMatrix> stiffness;  ///< c_ab per node
  std::vector<SmallVector> drift;      ///< q_b per node (may be empty)
  std::vector<double> potential;       ///< V per node (may be empty)
  std::vector<double> mass;            ///< quadrature weights

  void apply(std::span<const double> v, std::span<double> out) const;
  double energy(std::span<const double> v) const;
  Eigen::MatrixXd assemble() const;
};

/// -Lap_Sigma as a quadratic form: c = dA I^{-1}, mass = dA.
QuadraticForm dirichlet_form(const SurfaceGeometry& geometry);

/// The rewritten second-variation form Q(psi) (Jacobi/stability form).
QuadraticForm jacobi_form(const SurfaceGeometry& geometry);

/// Zeroth-order coefficient of the stability operator per node (excluding
/// the first-order drift term).
std::vector<double> stability_potential(const SurfaceGeometry& geometry);

/// Discrete Laplace-Beltrami: -(1/dA) K v with K the Dirichlet form.
std::vector<double> laplace_beltrami(const SurfaceGeometry& geometry, std::span<const double> field);

}  // namespace warprig
