#pragma once

// Families of graphs with constant H~ and prescribed mean height, built by
// continuation in the mean, and the monotonicity quantity along them.

#include <functional>
#include <span>
#include <vector>

#include "warprig/minimize_stability.hpp"

namespace warprig {

struct FoliationLeaf {
  double t = 0.0;
  GraphSurface surface;
  double htilde = 0.0;    ///< the constant value of H~ on the leaf
  double lagrange = 0.0;  ///< Newton multiplier (equals htilde at convergence)
  double energy = 0.0;
  double residual = 0.0;  ///< max |H~ - lagrange|
  int iterations = 0;
  std::vector<double> phi;  ///< normal speed of the family (filled by build_foliation)
};

struct FoliationResult {
  std::vector<FoliationLeaf> leaves;  ///< ascending in t
  std::vector<double> psi;            ///< Psi(t_k)
  std::vector<double> energies;
};

/// Newton on (rho, lambda): H~(rho) - lambda = 0 nodewise, mean(rho) = t.
FoliationLeaf solve_leaf(const WarpedMetricSpec& spec, const RadialWeight& u, double t, const GraphSurface& initial,
                         const SolveOptions& opts = {});

/// `steps` leaves uniformly spaced on [t_min, t_max], solved outward from
/// the leaf closest to t = 0 (or the range midpoint when 0 is outside).
FoliationResult build_foliation(const WarpedMetricSpec& spec, const RadialWeight& u, const PeriodicGrid& grid,
                                double t_min, double t_max, int steps, const SolveOptions& opts = {});

/// Max relative deviation of (Jacobian of H~) phi from -Lap_Sigma phi over
/// the test functions, on a surface where the two should agree.
double linearization_check(const WarpedMetricSpec& spec, const RadialWeight& u, const GraphSurface& surface,
                           const std::vector<std::vector<double>>& test_functions);

struct MonotonicityReport {
  std::vector<double> t;
  std::vector<double> psi;
  std::vector<double> conserved;  ///< P(t) = exp(int_0^t Psi) H~(t)
  double max_violation = 0.0;     ///< max over adjacent pairs of [P(t_k+1) - P(t_k)] / dt
};

/// Psi(t) = (int 1/phi dA)^{-1} int (n-3) w_nu dA on each leaf.
MonotonicityReport monotonicity_report(const FoliationResult& foliation, const WarpedMetricSpec& spec,
                                       const RadialWeight& u);
/// Same accumulation with a caller-supplied Psi.
MonotonicityReport monotonicity_report(const FoliationResult& foliation, const std::function<double(double)>& psi);

/// Psi values on each leaf (refuses leaves with phi <= 0).
std::vector<double> leaf_psi(const FoliationResult& foliation, const WarpedMetricSpec& spec, const RadialWeight& u);

}  // namespace warprig
