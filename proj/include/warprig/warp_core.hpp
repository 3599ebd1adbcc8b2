#pragma once

// Closed-form curvature of warped products g = dt^2 + f(t)^2 g_N over a flat
// torus fiber, with radial (t-only) weights u(t).
//
// Sign convention: Laplacians are div(grad), so -Laplacian is nonnegative.

#include <span>
#include <vector>

namespace warprig {

/// Value and first two derivatives of a radial function at one t.
struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Positive 2*pi-periodic profile stored as a truncated Fourier series
///   f(t) = mean + sum_k (cos_k cos(k t) + sin_k sin(k t)),  k = 1..K.
/// Derivatives are taken term by term and are exact for the stored series.
class WarpProfile {
 public:
  WarpProfile(double mean, std::vector<double> cos_amplitudes,
              std::vector<double> sin_amplitudes);

  static WarpProfile constant(double value);
  /// Least-squares projection of uniform samples on [0, 2*pi) onto at most
  /// `max_modes` harmonics (capped at 32 and at the Nyquist limit).
  static WarpProfile from_samples(std::span<const double> samples, int max_modes = 32);

  double operator()(double t) const;
  Jet jet(double t) const;

  /// Sampled lower bound; strictly positive for every constructed profile.
  double f_min() const { return f_min_; }
  int modes() const { return static_cast<int>(cos_.size()); }
  double mean() const { return mean_; }
  const std::vector<double>& cos_amplitudes() const { return cos_; }
  const std::vector<double>& sin_amplitudes() const { return sin_; }

  static constexpr int kMaxModes = 32;

 private:
  double mean_;
  std::vector<double> cos_;
  std::vector<double> sin_;
  double f_min_ = 0.0;
};

/// Flat torus fiber R^d / (L_1 Z x ... x L_d Z). Its Ricci tensor vanishes;
/// `scalar_curvature` is carried as a formula parameter only.
struct FiberGeometry {
  int dim = 0;
  std::vector<double> periods;
  double scalar_curvature = 0.0;

  double volume() const;
  void validate() const;
};

struct WarpedMetricSpec {
  int n = 3;
  WarpProfile warp = WarpProfile::constant(1.0);
  FiberGeometry fiber;
  double gamma = 2.0;

  /// Builds and validates a spec; gamma defaults to n - 1.
  static WarpedMetricSpec make(int n, WarpProfile warp, std::vector<double> periods,
                               double fiber_scalar_curvature = 0.0);
  static WarpedMetricSpec make(int n, WarpProfile warp, std::vector<double> periods,
                               double fiber_scalar_curvature, double gamma);

  void validate() const;
};

/// Positive radial weight u(t) = base(t) * factor(t) where base is 1/f or 1.
class RadialWeight {
 public:
  /// u = 1/f.
  static RadialWeight canonical();
  /// u = 1.
  static RadialWeight unit();
  /// u = p(t).
  static RadialWeight from_profile(WarpProfile p);
  /// u = p(t) / f(t).
  static RadialWeight canonical_times(WarpProfile p);

  Jet jet(const WarpedMetricSpec& spec, double t) const;
  double operator()(const WarpedMetricSpec& spec, double t) const { return jet(spec, t).value; }

  /// True iff u = 1/f exactly (no extra factor).
  bool is_canonical() const { return reciprocal_warp_ && trivial_factor_; }
  bool uses_reciprocal_warp() const { return reciprocal_warp_; }
  const WarpProfile& factor() const { return factor_; }

 private:
  RadialWeight(bool reciprocal_warp, WarpProfile factor, bool trivial_factor);

  bool reciprocal_warp_;
  WarpProfile factor_;
  bool trivial_factor_;
};

struct CurvatureProfile {
  double ric_tt = 0.0;           ///< Ric(d_t, d_t)
  double ric_fiber_coeff = 0.0;  ///< coefficient of <X,Y>_g for X,Y tangent to the fiber
  double scalar = 0.0;
};

enum class SpectralKind { ricci, scalar };

CurvatureProfile curvature_profile(const WarpedMetricSpec& spec, double t);

/// Fiber-direction Ricci eigenvalue; the fiber is taken Einstein, so a nonzero
/// fiber scalar curvature enters as Sc_N / ((n-1) f^2).
double fiber_ricci_eigenvalue(const WarpedMetricSpec& spec, double t);

/// Laplace-Beltrami of a t-only function: h'' + (n-1)(f'/f) h'.
double radial_laplacian(const WarpedMetricSpec& spec, const Jet& h, double t);

double identity_residual_ricci(const WarpedMetricSpec& spec, double t);
double identity_residual_scalar(const WarpedMetricSpec& spec, double t);

/// Spectral-curvature hypothesis margin; >= 0 means the hypothesis holds at t.
double spectral_condition_margin(const WarpedMetricSpec& spec, const RadialWeight& u, double t,
                                 SpectralKind kind);

/// The d_t-direction contribution of the Ricci margin (uses Ric(d_t,d_t)
/// instead of the least eigenvalue).
double radial_direction_margin(const WarpedMetricSpec& spec, const RadialWeight& u, double t);

}  // namespace warprig
