#pragma once

// Shared pieces of the Newton-Krylov solvers for H~-type equations on graphs.

#include <span>
#include <vector>

#include "warprig/hypersurface.hpp"
#include "warprig/linalg.hpp"

namespace warprig::detail {

/// Nodewise H~ of the graph rho. Throws ChartExit outside the chart.
std::vector<double> htilde_of(const PeriodicGrid& grid, std::span<const double> rho, const WarpedMetricSpec& spec,
                              const RadialWeight& u);

/// Central-difference directional derivative of rho -> H~(rho).
class HtildeJacobian {
 public:
  HtildeJacobian(const PeriodicGrid& grid, std::vector<double> rho, const WarpedMetricSpec& spec,
                 const RadialWeight& u);
  void apply(std::span<const double> v, std::span<double> out) const;

 private:
  PeriodicGrid grid_;
  std::vector<double> rho_;
  const WarpedMetricSpec& spec_;
  const RadialWeight& u_;
};

/// Approximate inverse of the H~ linearization: the flat Laplacian scaled by
/// 1/f(t)^2 on non-constant modes and the identity on constants.
class FlatPreconditioner {
 public:
  FlatPreconditioner(const PeriodicGrid& grid, double warp_value);
  void apply(std::span<const double> r, std::span<double> x) const;

 private:
  PeriodicGrid grid_;
  double scale_;
};

double max_abs(std::span<const double> v);
double rms(std::span<const double> v);

}  // namespace warprig::detail
