#pragma once

// Uniform periodic grid over the flat-torus fiber and the 1D differentiation
// operators acting along each axis.
//
// Node ordering is row-major: the last axis varies fastest.

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace warprig {

enum class DifferenceScheme {
  spectral,  ///< Fourier collocation; exact for resolved trigonometric content
  central,   ///< second-order central differences
};

class PeriodicGrid {
 public:
  static constexpr std::size_t kDefaultNodeCap = 16384;

  /// Empty grid with no nodes; only useful as a placeholder.
  PeriodicGrid();
  PeriodicGrid(std::vector<int> dims, std::vector<double> periods,
               DifferenceScheme scheme = DifferenceScheme::spectral,
               std::size_t node_cap = kDefaultNodeCap);

  int dim() const { return static_cast<int>(impl_->dims.size()); }
  std::size_t size() const { return impl_->size; }
  int resolution(int axis) const { return impl_->dims[axis]; }
  double period(int axis) const { return impl_->periods[axis]; }
  double spacing(int axis) const { return impl_->periods[axis] / impl_->dims[axis]; }
  double cell_volume() const { return impl_->cell_volume; }
  double volume() const;
  DifferenceScheme scheme() const { return impl_->scheme; }
  const std::vector<int>& dims() const { return impl_->dims; }
  const std::vector<double>& periods() const { return impl_->periods; }
  std::size_t stride(int axis) const { return impl_->strides[axis]; }

  int index(std::size_t node, int axis) const {
    return static_cast<int>((node / impl_->strides[axis]) % impl_->dims[axis]);
  }
  double coordinate(std::size_t node, int axis) const { return index(node, axis) * spacing(axis); }

  /// 1D differentiation matrix along an axis (antisymmetric).
  const Eigen::MatrixXd& diff_matrix(int axis) const { return impl_->diff[axis]; }

  /// out = d/dx_axis in.
  void differentiate(std::span<const double> in, int axis, std::span<double> out) const;
  std::vector<double> derivative(std::span<const double> in, int axis) const;

  /// The alternating mode (-1)^i along an axis is annihilated by both
  /// schemes for even resolution. Returns its squared wavenumber (0 for odd
  /// resolution, where no such mode exists).
  double nyquist_wavenumber_sq(int axis) const { return impl_->nyquist_k2[axis]; }
  /// out(node) = (-1)^i * mean over the axis line of (-1)^m in(m).
  void nyquist_component(std::span<const double> in, int axis, std::span<double> out) const;

  double mean(std::span<const double> values) const;

  template <class F>
  std::vector<double> sample(F&& fn) const {
    std::vector<double> v(size());
    std::vector<double> x(dim());
    for (std::size_t p = 0; p < size(); ++p) {
      for (int a = 0; a < dim(); ++a) x[a] = coordinate(p, a);
      v[p] = fn(std::span<const double>(x));
    }
    return v;
  }

  /// Inverse of the flat operator sum_a (D_a^T D_a + Nyquist closure), on
  /// the complement of the constants; `shift` is added to every eigenvalue
  /// (shift = 0 maps constants to 0).
  void apply_flat_inverse(std::span<const double> in, double scale, double shift,
                          std::span<double> out) const;

 private:
  struct Impl {
    std::vector<int> dims;
    std::vector<double> periods;
    std::vector<std::size_t> strides;
    std::size_t size = 0;
    double cell_volume = 0.0;
    DifferenceScheme scheme = DifferenceScheme::spectral;
    std::vector<Eigen::MatrixXd> diff;
    std::vector<double> nyquist_k2;
    std::vector<Eigen::MatrixXd> flat_vectors;  // eigenvectors of the 1D flat operator
    std::vector<Eigen::VectorXd> flat_values;
  };
  std::shared_ptr<const Impl> impl_;

  void apply_along_axis(const Eigen::MatrixXd& m, std::span<const double> in, int axis,
                        std::span<double> out) const;
};

}  // namespace warprig
