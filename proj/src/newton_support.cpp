#include "newton_support.hpp"

#include <algorithm>
#include <cmath>

namespace warprig::detail {

std::vector<double> htilde_of(const PeriodicGrid& grid, std::span<const double> rho, const WarpedMetricSpec& spec,
                              const RadialWeight& u) {
  const GraphSurface s{grid, {rho.begin(), rho.end()}};
  return induced_geometry(s, spec, u).htilde();
}

HtildeJacobian::HtildeJacobian(const PeriodicGrid& grid, std::vector<double> rho, const WarpedMetricSpec& spec,
                               const RadialWeight& u)
    : grid_(grid), rho_(std::move(rho)), spec_(spec), u_(u) {}

void HtildeJacobian::apply(std::span<const double> v, std::span<double> out) const {
  const double scale = max_abs(v);
  if (scale == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double delta = 1e-5 / scale;
  std::vector<double> plus(rho_), minus(rho_);
  for (std::size_t p = 0; p < rho_.size(); ++p) {
    plus[p] += delta * v[p];
    minus[p] -= delta * v[p];
  }
  const auto hp = htilde_of(grid_, plus, spec_, u_);
  const auto hm = htilde_of(grid_, minus, spec_, u_);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = (hp[p] - hm[p]) / (2.0 * delta);
}

FlatPreconditioner::FlatPreconditioner(const PeriodicGrid& grid, double warp_value)
    : grid_(grid), scale_(1.0 / (warp_value * warp_value)) {}

void FlatPreconditioner::apply(std::span<const double> r, std::span<double> x) const {
  grid_.apply_flat_inverse(r, scale_, 0.0, x);
  const double m = grid_.mean(r);
  for (double& v : x) v += m;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double rms(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace warprig::detail
