#include "warprig/periodic_grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace warprig {

namespace {

Eigen::MatrixXd spectral_diff(int n, double period) {
  // Fourier collocation derivative on [0, period).
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  const double scale = 2.0 * std::numbers::pi / period;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double x = (i - j) * std::numbers::pi / n;
      const double sign = ((i - j) % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = (n % 2 == 0) ? 0.5 * sign / std::tan(x) : 0.5 * sign / std::sin(x);
      d(i, j) *= scale;
    }
  return d;
}

Eigen::MatrixXd central_diff(int n, double period) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  const double h = period / n;
  for (int i = 0; i < n; ++i) {
    d(i, (i + 1) % n) += 0.5 / h;
    d(i, (i + n - 1) % n) -= 0.5 / h;
  }
  return d;
}

}  // namespace

PeriodicGrid::PeriodicGrid() {
  static const auto empty = std::make_shared<const Impl>();
  impl_ = empty;
}

PeriodicGrid::PeriodicGrid(std::vector<int> dims, std::vector<double> periods, DifferenceScheme scheme,
                           std::size_t node_cap) {
  auto impl = std::make_shared<Impl>();
  if (dims.empty() || dims.size() > 3) throw std::invalid_argument("PeriodicGrid: need 1 to 3 axes");
  if (dims.size() != periods.size()) throw std::invalid_argument("PeriodicGrid: one period per axis");
  impl->size = 1;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (dims[a] < 8) throw std::invalid_argument("PeriodicGrid: resolution must be >= 8 per axis");
    if (!(periods[a] > 0.0) || !std::isfinite(periods[a]))
      throw std::invalid_argument("PeriodicGrid: periods must be positive");
    impl->size *= static_cast<std::size_t>(dims[a]);
  }
  if (impl->size > node_cap) throw std::invalid_argument("PeriodicGrid: node count exceeds cap");
  impl->dims = std::move(dims);
  impl->periods = std::move(periods);
  impl->scheme = scheme;
  const int d = static_cast<int>(impl->dims.size());
  impl->strides.assign(d, 1);
  for (int a = d - 2; a >= 0; --a) impl->strides[a] = impl->strides[a + 1] * impl->dims[a + 1];
  impl->cell_volume = 1.0;
  for (int a = 0; a < d; ++a) {
    const int n = impl->dims[a];
    const double L = impl->periods[a];
    impl->cell_volume *= L / n;
    impl->diff.push_back(scheme == DifferenceScheme::spectral ? spectral_diff(n, L) : central_diff(n, L));
    double k2 = 0.0;
    if (n % 2 == 0) {
      const double k = scheme == DifferenceScheme::spectral ? std::numbers::pi * n / L : 2.0 * n / L;
      k2 = k * k;
    }
    impl->nyquist_k2.push_back(k2);

    Eigen::MatrixXd op = impl->diff[a].transpose() * impl->diff[a];
    if (n % 2 == 0) {
      Eigen::VectorXd alt(n);
      for (int i = 0; i < n; ++i) alt[i] = (i % 2 == 0) ? 1.0 : -1.0;
      op += (k2 / n) * alt * alt.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (op + op.transpose()));
    impl->flat_vectors.push_back(es.eigenvectors());
    impl->flat_values.push_back(es.eigenvalues());
  }
  impl_ = std::move(impl);
}

double PeriodicGrid::volume() const {
  double v = 1.0;
  for (double p : impl_->periods) v *= p;
  return v;
}

void PeriodicGrid::apply_along_axis(const Eigen::MatrixXd& m, std::span<const double> in, int axis,
                                    std::span<double> out) const {
  const int n = impl_->dims[axis];
  const std::size_t stride = impl_->strides[axis];
  const std::size_t block = stride * n;
  const std::size_t total = impl_->size;
  Eigen::VectorXd line(n), res(n);
  for (std::size_t base = 0; base < total; base += block)
    for (std::size_t off = 0; off < stride; ++off) {
      const std::size_t first = base + off;
      for (int i = 0; i < n; ++i) line[i] = in[first + i * stride];
      res.noalias() = m * line;
      for (int i = 0; i < n; ++i) out[first + i * stride] = res[i];
    }
}

void PeriodicGrid::differentiate(std::span<const double> in, int axis, std::span<double> out) const {
  if (in.size() != size() || out.size() != size())
    throw std::invalid_argument("PeriodicGrid::differentiate: field size mismatch");
  apply_along_axis(impl_->diff[axis], in, axis, out);
}

std::vector<double> PeriodicGrid::derivative(std::span<const double> in, int axis) const {
  std::vector<double> out(size());
  differentiate(in, axis, out);
  return out;
}

void PeriodicGrid::nyquist_component(std::span<const double> in, int axis, std::span<double> out) const {
  const int n = impl_->dims[axis];
  if (n % 2 != 0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const std::size_t stride = impl_->strides[axis];
  const std::size_t block = stride * n;
  for (std::size_t base = 0; base < impl_->size; base += block)
    for (std::size_t off = 0; off < stride; ++off) {
      const std::size_t first = base + off;
      double c = 0.0;
      for (int i = 0; i < n; ++i) c += ((i % 2 == 0) ? 1.0 : -1.0) * in[first + i * stride];
      c /= n;
      for (int i = 0; i < n; ++i) out[first + i * stride] = ((i % 2 == 0) ? 1.0 : -1.0) * c;
    }
}

double PeriodicGrid::mean(std::span<const double> values) const {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

void PeriodicGrid::apply_flat_inverse(std::span<const double> in, double scale, double shift,
                                      std::span<double> out) const {
  const int d = dim();
  std::vector<double> work(in.begin(), in.end()), tmp(size());
  for (int a = 0; a < d; ++a) {
    apply_along_axis(impl_->flat_vectors[a].transpose(), work, a, tmp);
    work.swap(tmp);
  }
  // Divide by the tensor-product eigenvalue.
  for (std::size_t p = 0; p < size(); ++p) {
    double lam = 0.0;
    for (int a = 0; a < d; ++a) lam += impl_->flat_values[a][index(p, a)];
    const double denom = scale * lam + shift;
    work[p] = (std::abs(lam) < 1e-9 && shift == 0.0) ? 0.0 : work[p] / denom;
  }
  for (int a = 0; a < d; ++a) {
    apply_along_axis(impl_->flat_vectors[a], work, a, tmp);
    work.swap(tmp);
  }
  std::copy(work.begin(), work.end(), out.begin());
}

}  // namespace warprig
