#pragma once

// Weighted-area minimization within the graph class, the stability spectrum
// of the second-variation form, rigidity residuals, and the conformal
// operator on the fiber.

#include <stdexcept>
#include <string>
#include <vector>

#include "warprig/hypersurface.hpp"

namespace warprig {

enum class SolveMode { gradient_flow, newton };

struct SolveOptions {
  double tolerance = 1e-10;  ///< on max |H~|
  int max_iterations = 0;    ///< 0 picks 500 (flow) or 50 (Newton)
  double initial_step = 1.0;
  double min_step = 1e-12;
  SolveMode mode = SolveMode::newton;
  double krylov_tolerance = 1e-12;
  int krylov_max_iterations = 400;

  int iteration_limit() const;
  void validate() const;
};

struct SolveTraceEntry {
  int iteration = 0;
  double energy = 0.0;
  double residual = 0.0;  ///< max |H~| (or max |H~ - lambda| for leaves)
};

struct MinimizeResult {
  GraphSurface surface;
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  std::vector<SolveTraceEntry> trace;
};

/// Iteration budget exhausted or no descent possible. Carries the best
/// iterate found.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, MinimizeResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const MinimizeResult& best() const { return best_; }

 private:
  MinimizeResult best_;
};

/// A Newton system could not be solved (Krylov stagnation on a singular or
/// near-singular Jacobian).
class JacobianSingular : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MinimizeResult minimize_weighted_area(const GraphSurface& initial, const WarpedMetricSpec& spec,
                                      const RadialWeight& u, const SolveOptions& opts = {});

struct StabilitySpectrum {
  std::vector<double> eigenvalues;                 ///< ascending
  std::vector<std::vector<double>> eigenfunctions;  ///< psi, normalized to sum dA psi^2 = 1
  bool dense = true;                               ///< dense solve (false: subspace iteration)
};

/// Refuses (std::invalid_argument) when max |H~| exceeds `minimality_threshold`.
StabilitySpectrum stability_spectrum(const SurfaceGeometry& geometry, int k,
                                     double minimality_threshold = 1e-6);
StabilitySpectrum stability_spectrum(const GraphSurface& surface, const WarpedMetricSpec& spec,
                                     const RadialWeight& u, int k, double minimality_threshold = 1e-6);

/// k lowest eigenpairs of a quadratic form against its diagonal mass.
StabilitySpectrum lowest_eigenpairs(const QuadraticForm& form, int k);

struct RigidityReport {
  double umbilicity_residual = 0.0;
  double tangential_w_residual = 0.0;
  double spectral_equality_residual = 0.0;
  double htilde_residual = 0.0;
};

/// Residuals of the equality case. The spectral residual compares, nodewise,
///   -gamma u^{-1} Lap_g u + Ric(nu,nu)   (ricci)   or   + Sc_g / 2   (scalar)
/// with the constant left over on the rigid model,
///   (n-1)(n-3)|grad w|^2                  or   gamma(gamma-3)|grad w|^2 / 2.
RigidityReport rigidity_report(const GraphSurface& surface, const WarpedMetricSpec& spec, const RadialWeight& u,
                               SpectralKind kind = SpectralKind::ricci);

/// Lowest eigenvalues of -(2(n-2)/(n-3)) Lap + Sc/2 on the flat fiber
/// (Sc = fiber scalar curvature). Throws std::invalid_argument for n = 3.
std::vector<double> conformal_operator_spectrum(const WarpedMetricSpec& spec, const PeriodicGrid& grid, int k);
/// Same operator on a graph surface with its induced metric and the
/// intrinsic scalar curvature from the Gauss equation.
std::vector<double> conformal_operator_spectrum(const WarpedMetricSpec& spec, const SurfaceGeometry& geometry, int k);

/// Intrinsic scalar curvature of the surface, Sc_g - 2 Ric(nu,nu) + H^2 - |A|^2.
std::vector<double> gauss_scalar_curvature(const SurfaceGeometry& geometry);

}  // namespace warprig
