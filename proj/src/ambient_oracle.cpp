#include "warprig/ambient_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace warprig::oracle {

namespace {

// Christoffel symbols Gamma[a](b, c) = Gamma^a_bc at y.
std::vector<Eigen::MatrixXd> christoffel(const MetricField& metric, const Eigen::VectorXd& y, double h) {
  const int n = static_cast<int>(y.size());
  std::vector<Eigen::MatrixXd> dg(n);  // dg[e] = d_e g
  for (int e = 0; e < n; ++e) {
    Eigen::VectorXd yp = y, ym = y;
    yp[e] += h;
    ym[e] -= h;
    dg[e] = (metric(yp) - metric(ym)) / (2.0 * h);
  }
  const Eigen::MatrixXd ginv = metric(y).llt().solve(Eigen::MatrixXd::Identity(n, n));
  std::vector<Eigen::MatrixXd> gamma(n, Eigen::MatrixXd::Zero(n, n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) s += ginv(a, d) * (dg[b](d, c) + dg[c](d, b) - dg[d](b, c));
        gamma[a](b, c) = 0.5 * s;
      }
  return gamma;
}

}  // namespace

AmbientPoint reduce(const WarpedMetricSpec& spec, AmbientPoint p) {
  p.x.resize(spec.fiber.dim, 0.0);
  for (int i = 0; i < spec.fiber.dim; ++i) {
    const double L = spec.fiber.periods[i];
    p.x[i] = std::fmod(p.x[i], L);
    if (p.x[i] < 0.0) p.x[i] += L;
  }
  return p;
}

MetricSample metric_at(const WarpedMetricSpec& spec, const AmbientPoint& p) {
  spec.validate();
  const int n = spec.n;
  const double f = spec.warp(p.t);
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
  for (int i = 1; i < n; ++i) g(i, i) = f * f;
  return {g};
}

OracleCurvature curvature_fd(const MetricField& metric, const Eigen::VectorXd& y, double h) {
  if (!(h >= 1e-6 && h <= 1e-2)) throw std::invalid_argument("curvature_fd: step must lie in [1e-6, 1e-2]");
  const int n = static_cast<int>(y.size());
  const auto gamma = christoffel(metric, y, h);
  std::vector<std::vector<Eigen::MatrixXd>> dgamma(n);  // dgamma[e][a] = d_e Gamma^a
  for (int e = 0; e < n; ++e) {
    Eigen::VectorXd yp = y, ym = y;
    yp[e] += h;
    ym[e] -= h;
    const auto gp = christoffel(metric, yp, h);
    const auto gm = christoffel(metric, ym, h);
    dgamma[e].resize(n);
    for (int a = 0; a < n; ++a) dgamma[e][a] = (gp[a] - gm[a]) / (2.0 * h);
  }
  // R_bd = d_a G^a_bd - d_d G^a_ab + G^a_ae G^e_bd - G^a_de G^e_ab
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) {
        s += dgamma[a][a](b, d) - dgamma[d][a](a, b);
        for (int e = 0; e < n; ++e) s += gamma[a](a, e) * gamma[e](b, d) - gamma[a](d, e) * gamma[e](a, b);
      }
      ric(b, d) = s;
    }
  const Eigen::MatrixXd ginv = metric(y).llt().solve(Eigen::MatrixXd::Identity(n, n));
  return {ric, (ginv.cwiseProduct(ric)).sum()};
}

namespace {

MetricField warped_metric_field(const WarpedMetricSpec& spec) {
  return [spec](const Eigen::VectorXd& y) {
    AmbientPoint p{y[0], std::vector<double>(y.data() + 1, y.data() + y.size())};
    return metric_at(spec, p).components;
  };
}

Eigen::VectorXd coordinates(const WarpedMetricSpec& spec, const AmbientPoint& p) {
  const AmbientPoint q = reduce(spec, p);
  Eigen::VectorXd y(spec.n);
  y[0] = q.t;
  for (int i = 0; i < spec.fiber.dim; ++i) y[i + 1] = q.x[i];
  return y;
}

}  // namespace

OracleCurvature curvature_fd(const WarpedMetricSpec& spec, const AmbientPoint& p, double h) {
  spec.validate();
  return curvature_fd(warped_metric_field(spec), coordinates(spec, p), h);
}

OracleCurvature curvature_fd_richardson(const WarpedMetricSpec& spec, const AmbientPoint& p, double h) {
  const OracleCurvature coarse = curvature_fd(spec, p, h);
  const OracleCurvature fine = curvature_fd(spec, p, 0.5 * h);
  return {(4.0 * fine.ricci - coarse.ricci) / 3.0, (4.0 * fine.scalar - coarse.scalar) / 3.0};
}

}  // namespace warprig::oracle
