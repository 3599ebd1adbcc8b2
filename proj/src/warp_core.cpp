#include "warprig/warp_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace warprig {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_finite(double t, const char* what) {
  if (!std::isfinite(t)) throw std::invalid_argument(std::string(what) + ": non-finite argument");
}

}  // namespace

WarpProfile::WarpProfile(double mean, std::vector<double> cos_amplitudes,
                         std::vector<double> sin_amplitudes)
    : mean_(mean), cos_(std::move(cos_amplitudes)), sin_(std::move(sin_amplitudes)) {
  const std::size_t k = std::max(cos_.size(), sin_.size());
  if (k > static_cast<std::size_t>(kMaxModes))
    throw std::invalid_argument("WarpProfile: more than 32 Fourier modes");
  cos_.resize(k, 0.0);
  sin_.resize(k, 0.0);
  if (!std::isfinite(mean_) ||
      !std::all_of(cos_.begin(), cos_.end(), [](double c) { return std::isfinite(c); }) ||
      !std::all_of(sin_.begin(), sin_.end(), [](double c) { return std::isfinite(c); }))
    throw std::invalid_argument("WarpProfile: non-finite coefficient");

  const int samples = std::max(1024, 64 * (static_cast<int>(k) + 1));
  f_min_ = mean_;
  for (int i = 0; i < samples; ++i) f_min_ = std::min(f_min_, (*this)(kTwoPi * i / samples));
  if (!(f_min_ > 0.0)) throw std::invalid_argument("WarpProfile: profile is not positive");
}

WarpProfile WarpProfile::constant(double value) { return WarpProfile(value, {}, {}); }

WarpProfile WarpProfile::from_samples(std::span<const double> samples, int max_modes) {
  const int n = static_cast<int>(samples.size());
  if (n < 3) throw std::invalid_argument("WarpProfile::from_samples: need at least 3 samples");
  const int k_max = std::min({max_modes, kMaxModes, (n - 1) / 2});
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= n;
  std::vector<double> c(k_max), s(k_max);
  for (int k = 1; k <= k_max; ++k) {
    double ck = 0.0, sk = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = kTwoPi * i / n;
      ck += samples[i] * std::cos(k * t);
      sk += samples[i] * std::sin(k * t);
    }
    c[k - 1] = 2.0 * ck / n;
    s[k - 1] = 2.0 * sk / n;
  }
  return WarpProfile(mean, std::move(c), std::move(s));
}

double WarpProfile::operator()(double t) const {
  double v = mean_;
  for (std::size_t k = 1; k <= cos_.size(); ++k) {
    const double kt = static_cast<double>(k) * t;
    v += cos_[k - 1] * std::cos(kt) + sin_[k - 1] * std::sin(kt);
  }
  return v;
}

Jet WarpProfile::jet(double t) const {
  Jet j{mean_, 0.0, 0.0};
  for (std::size_t k = 1; k <= cos_.size(); ++k) {
    const double kd = static_cast<double>(k);
    const double c = std::cos(kd * t), s = std::sin(kd * t);
    const double a = cos_[k - 1], b = sin_[k - 1];
    j.value += a * c + b * s;
    j.d1 += kd * (-a * s + b * c);
    j.d2 += -kd * kd * (a * c + b * s);
  }
  return j;
}

double FiberGeometry::volume() const {
  double v = 1.0;
  for (double p : periods) v *= p;
  return v;
}

void FiberGeometry::validate() const {
  if (dim < 1) throw std::invalid_argument("FiberGeometry: dimension must be >= 1");
  if (static_cast<int>(periods.size()) != dim)
    throw std::invalid_argument("FiberGeometry: need one period per fiber axis");
  for (double p : periods)
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::invalid_argument("FiberGeometry: periods must be positive and finite");
  if (!std::isfinite(scalar_curvature))
    throw std::invalid_argument("FiberGeometry: non-finite scalar curvature");
}

WarpedMetricSpec WarpedMetricSpec::make(int n, WarpProfile warp, std::vector<double> periods,
                                        double fiber_scalar_curvature) {
  return make(n, std::move(warp), std::move(periods), fiber_scalar_curvature, n - 1.0);
}

WarpedMetricSpec WarpedMetricSpec::make(int n, WarpProfile warp, std::vector<double> periods,
                                        double fiber_scalar_curvature, double gamma) {
  WarpedMetricSpec spec;
  spec.n = n;
  spec.warp = std::move(warp);
  spec.fiber.dim = static_cast<int>(periods.size());
  spec.fiber.periods = std::move(periods);
  spec.fiber.scalar_curvature = fiber_scalar_curvature;
  spec.gamma = gamma;
  spec.validate();
  return spec;
}

void WarpedMetricSpec::validate() const {
  if (n < 3 || n > 7) throw std::invalid_argument("WarpedMetricSpec: n must lie in [3, 7]");
  fiber.validate();
  if (fiber.dim != n - 1)
    throw std::invalid_argument("WarpedMetricSpec: fiber dimension must equal n - 1");
  if (!std::isfinite(gamma)) throw std::invalid_argument("WarpedMetricSpec: non-finite gamma");
}

RadialWeight::RadialWeight(bool reciprocal_warp, WarpProfile factor, bool trivial_factor)
    : reciprocal_warp_(reciprocal_warp), factor_(std::move(factor)), trivial_factor_(trivial_factor) {}

RadialWeight RadialWeight::canonical() { return RadialWeight(true, WarpProfile::constant(1.0), true); }
RadialWeight RadialWeight::unit() { return RadialWeight(false, WarpProfile::constant(1.0), true); }
RadialWeight RadialWeight::from_profile(WarpProfile p) { return RadialWeight(false, std::move(p), false); }
RadialWeight RadialWeight::canonical_times(WarpProfile p) {
  return RadialWeight(true, std::move(p), false);
}

Jet RadialWeight::jet(const WarpedMetricSpec& spec, double t) const {
  const Jet m = trivial_factor_ ? Jet{1.0, 0.0, 0.0} : factor_.jet(t);
  if (!reciprocal_warp_) return m;
  const Jet f = spec.warp.jet(t);
  // b = 1/f
  const Jet b{1.0 / f.value, -f.d1 / (f.value * f.value),
              -f.d2 / (f.value * f.value) + 2.0 * f.d1 * f.d1 / (f.value * f.value * f.value)};
  return {b.value * m.value, b.d1 * m.value + b.value * m.d1,
          b.d2 * m.value + 2.0 * b.d1 * m.d1 + b.value * m.d2};
}

CurvatureProfile curvature_profile(const WarpedMetricSpec& spec, double t) {
  require_finite(t, "curvature_profile");
  spec.validate();
  const Jet f = spec.warp.jet(t);
  const double n = spec.n;
  const double fpp_f = f.d2 / f.value;
  const double fp_f_sq = (f.d1 / f.value) * (f.d1 / f.value);
  CurvatureProfile c;
  c.ric_tt = -(n - 1.0) * fpp_f;
  c.ric_fiber_coeff = -(fpp_f + (n - 2.0) * fp_f_sq);
  c.scalar = spec.fiber.scalar_curvature / (f.value * f.value) - 2.0 * (n - 1.0) * fpp_f -
             (n - 1.0) * (n - 2.0) * fp_f_sq;
  return c;
}

double fiber_ricci_eigenvalue(const WarpedMetricSpec& spec, double t) {
  const CurvatureProfile c = curvature_profile(spec, t);
  const double f = spec.warp(t);
  return c.ric_fiber_coeff + spec.fiber.scalar_curvature / ((spec.n - 1.0) * f * f);
}

double radial_laplacian(const WarpedMetricSpec& spec, const Jet& h, double t) {
  require_finite(t, "radial_laplacian");
  if (!std::isfinite(h.value) || !std::isfinite(h.d1) || !std::isfinite(h.d2))
    throw std::invalid_argument("radial_laplacian: non-finite jet");
  const Jet f = spec.warp.jet(t);
  return h.d2 + (spec.n - 1.0) * (f.d1 / f.value) * h.d1;
}

namespace {

Jet reciprocal_warp_jet(const WarpedMetricSpec& spec, double t) {
  return RadialWeight::canonical().jet(spec, t);
}

}  // namespace

double identity_residual_ricci(const WarpedMetricSpec& spec, double t) {
  const double n = spec.n;
  const Jet f = spec.warp.jet(t);
  const Jet h = reciprocal_warp_jet(spec, t);
  const double lhs = -(n - 1.0) * f.value * radial_laplacian(spec, h, t) + curvature_profile(spec, t).ric_tt;
  const double rhs = (n - 1.0) * (n - 3.0) * (f.d1 / f.value) * (f.d1 / f.value);
  return lhs - rhs;
}

double identity_residual_scalar(const WarpedMetricSpec& spec, double t) {
  if (spec.fiber.scalar_curvature != 0.0)
    throw std::invalid_argument("identity_residual_scalar: requires a scalar-flat fiber");
  const double n = spec.n;
  const Jet f = spec.warp.jet(t);
  const Jet h = reciprocal_warp_jet(spec, t);
  const double lhs =
      -(n - 1.0) * f.value * radial_laplacian(spec, h, t) + 0.5 * curvature_profile(spec, t).scalar;
  const double rhs = 0.5 * (n - 1.0) * (n - 4.0) * (f.d1 / f.value) * (f.d1 / f.value);
  return lhs - rhs;
}

double spectral_condition_margin(const WarpedMetricSpec& spec, const RadialWeight& u, double t,
                                 SpectralKind kind) {
  require_finite(t, "spectral_condition_margin");
  const double n = spec.n;
  const double g = spec.gamma;
  const Jet uj = u.jet(spec, t);
  const double drift = -g * radial_laplacian(spec, uj, t) / uj.value;
  const double grad_sq = (uj.d1 / uj.value) * (uj.d1 / uj.value);
  const CurvatureProfile c = curvature_profile(spec, t);
  if (kind == SpectralKind::ricci) {
    const double least = std::min(c.ric_tt, fiber_ricci_eigenvalue(spec, t));
    return drift + least - (n - 1.0) * (n - 3.0) * grad_sq;
  }
  if (spec.n < 4)
    throw std::invalid_argument(
        "spectral_condition_margin: scalar kind needs n >= 4 (coefficient 2(n-2)/(n-3) is singular at n = 3)");
  if (spec.fiber.scalar_curvature != 0.0)
    throw std::invalid_argument("spectral_condition_margin: scalar kind needs a scalar-flat fiber");
  return drift + 0.5 * c.scalar - 0.5 * g * (g - 3.0) * grad_sq;
}

double radial_direction_margin(const WarpedMetricSpec& spec, const RadialWeight& u, double t) {
  const double n = spec.n;
  const Jet uj = u.jet(spec, t);
  const double drift = -spec.gamma * radial_laplacian(spec, uj, t) / uj.value;
  const double grad_sq = (uj.d1 / uj.value) * (uj.d1 / uj.value);
  return drift + curvature_profile(spec, t).ric_tt - (n - 1.0) * (n - 3.0) * grad_sq;
}

}  // namespace warprig
