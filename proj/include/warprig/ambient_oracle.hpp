#pragma once

// Finite-difference Ricci/scalar curvature from raw metric samples. Shares no
// derivative code with warp_core: only point values of the warp profile are
// read, every derivative is a central difference of metric components.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "warprig/warp_core.hpp"

namespace warprig::oracle {

/// Point (t, x_1..x_d) with fiber coordinates in length units.
struct AmbientPoint {
  double t = 0.0;
  std::vector<double> x;
};

struct MetricSample {
  Eigen::MatrixXd components;  ///< g_ab in the coordinate basis (dt, dx^1..dx^d)
};

struct OracleCurvature {
  Eigen::MatrixXd ricci;
  double scalar = 0.0;
};

/// Any smooth metric given pointwise in coordinates y = (t, x).
using MetricField = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Reduces the point's fiber coordinates into [0, L_i).
AmbientPoint reduce(const WarpedMetricSpec& spec, AmbientPoint p);

MetricSample metric_at(const WarpedMetricSpec& spec, const AmbientPoint& p);

/// O(h^2) central-difference Ricci tensor and scalar curvature.
/// Requires 1e-6 <= h <= 1e-2.
OracleCurvature curvature_fd(const WarpedMetricSpec& spec, const AmbientPoint& p, double h);

/// Richardson combination (4 R(h/2) - R(h)) / 3 of curvature_fd.
OracleCurvature curvature_fd_richardson(const WarpedMetricSpec& spec, const AmbientPoint& p, double h);

/// Generic entry point used by the two above.
OracleCurvature curvature_fd(const MetricField& metric, const Eigen::VectorXd& y, double h);

}  // namespace warprig::oracle
