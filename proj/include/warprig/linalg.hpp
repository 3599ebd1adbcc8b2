#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

namespace warprig::linalg {

/// y = A x for a square operator of fixed size.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct KrylovResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Restarted GMRES with right preconditioning. `x` holds the initial guess
/// on entry and the solution on exit.
KrylovResult gmres(const LinearOperator& a, const LinearOperator& right_preconditioner,
                   std::span<const double> b, std::span<double> x, double rtol, int max_iterations,
                   int restart = 60);

/// Preconditioned conjugate gradients for symmetric positive definite `a`.
/// Throws std::runtime_error if a nonpositive curvature direction appears.
KrylovResult pcg(const LinearOperator& a, const LinearOperator& preconditioner, std::span<const double> b,
                 std::span<double> x, double rtol, int max_iterations);

struct EigenPairs {
  std::vector<double> values;                ///< ascending
  std::vector<std::vector<double>> vectors;  ///< M-orthonormal: sum_i m_i v_i^2 = 1
};

/// k lowest eigenpairs of S v = lambda M v with M = diag(mass) > 0, from a
/// dense Cholesky factorization (shift-invert subspace iteration).
EigenPairs lowest_generalized_dense(const Eigen::MatrixXd& stiffness, std::span<const double> mass, int k);

struct SubspaceOptions {
  double shift = 1.0;  ///< S + shift*M must be positive definite
  double tolerance = 1e-10;
  int max_iterations = 300;
  int extra_vectors = 8;
};

/// Same problem solved matrix-free by shifted inverse subspace iteration with
/// Rayleigh-Ritz; each inner solve uses PCG on S + shift*M.
EigenPairs lowest_generalized_iterative(const LinearOperator& stiffness, std::span<const double> mass, int k,
                                        const LinearOperator& preconditioner, const SubspaceOptions& opts);

}  // namespace warprig::linalg
