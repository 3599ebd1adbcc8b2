#include "warprig/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace warprig::linalg {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

KrylovResult gmres(const LinearOperator& a, const LinearOperator& right_preconditioner,
                   std::span<const double> b, std::span<double> x, double rtol, int max_iterations,
                   int restart) {
  const std::size_t n = b.size();
  const double bnorm = norm(b);
  KrylovResult result;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.converged = true;
    return result;
  }
  std::vector<double> r(n), w(n), z(n);
  const int m = std::max(1, restart);
  std::vector<std::vector<double>> v(m + 1, std::vector<double>(n));
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
  std::vector<double> cs(m), sn(m), g(m + 1);

  int total = 0;
  while (total < max_iterations) {
    a(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double beta = norm(r);
    result.relative_residual = beta / bnorm;
    if (result.relative_residual <= rtol) {
      result.converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    h.setZero();
    int j = 0;
    for (; j < m && total < max_iterations; ++j, ++total) {
      right_preconditioner(v[j], z);
      a(z, w);
      for (int i = 0; i <= j; ++i) {  // modified Gram-Schmidt
        h(i, j) = dot(w, v[i]);
        for (std::size_t q = 0; q < n; ++q) w[q] -= h(i, j) * v[i][q];
      }
      h(j + 1, j) = norm(w);
      if (h(j + 1, j) > 0.0)
        for (std::size_t q = 0; q < n; ++q) v[j + 1][q] = w[q] / h(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
        h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
        h(i, j) = t;
      }
      const double denom = std::hypot(h(j, j), h(j + 1, j));
      cs[j] = denom == 0.0 ? 1.0 : h(j, j) / denom;
      sn[j] = denom == 0.0 ? 0.0 : h(j + 1, j) / denom;
      h(j, j) = denom;
      h(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      result.relative_residual = std::abs(g[j + 1]) / bnorm;
      if (result.relative_residual <= rtol || denom == 0.0) {
        ++j;
        ++total;
        break;
      }
    }
    // Back substitution and update x += M^{-1} V y.
    std::vector<double> y(j, 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < j; ++k) s -= h(i, k) * y[k];
      y[i] = h(i, i) == 0.0 ? 0.0 : s / h(i, i);
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int i = 0; i < j; ++i)
      for (std::size_t q = 0; q < n; ++q) w[q] += y[i] * v[i][q];
    right_preconditioner(w, z);
    for (std::size_t q = 0; q < n; ++q) x[q] += z[q];
    if (result.relative_residual <= rtol) {
      a(x, r);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
      result.relative_residual = norm(r) / bnorm;
      result.converged = result.relative_residual <= 10.0 * rtol;
      if (result.converged) break;
    }
  }
  result.iterations = total;
  return result;
}

KrylovResult pcg(const LinearOperator& a, const LinearOperator& preconditioner, std::span<const double> b,
                 std::span<double> x, double rtol, int max_iterations) {
  const std::size_t n = b.size();
  std::vector<double> r(n), z(n), p(n), ap(n);
  a(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  const double bnorm = std::max(norm(b), 1e-300);
  KrylovResult result;
  preconditioner(r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 0; it < max_iterations; ++it) {
    result.relative_residual = norm(r) / bnorm;
    if (result.relative_residual <= rtol) {
      result.converged = true;
      result.iterations = it;
      return result;
    }
    a(p, ap);
    const double curvature = dot(p, ap);
    if (!(curvature > 0.0)) throw std::runtime_error("pcg: operator is not positive definite");
    const double alpha = rz / curvature;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    preconditioner(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  result.relative_residual = norm(r) / bnorm;
  result.converged = result.relative_residual <= rtol;
  result.iterations = max_iterations;
  return result;
}

EigenPairs lowest_generalized_dense(const Eigen::MatrixXd& stiffness, std::span<const double> mass, int k) {
  const int n = static_cast<int>(stiffness.rows());
  if (stiffness.cols() != n || static_cast<int>(mass.size()) != n)
    throw std::invalid_argument("lowest_generalized_dense: size mismatch");
  if (k < 1 || k > n) throw std::invalid_argument("lowest_generalized_dense: bad eigenpair count");
  Eigen::VectorXd inv_sqrt(n);
  for (int i = 0; i < n; ++i) {
    if (!(mass[i] > 0.0)) throw std::invalid_argument("lowest_generalized_dense: mass must be positive");
    inv_sqrt[i] = 1.0 / std::sqrt(mass[i]);
  }
  Eigen::MatrixXd a = inv_sqrt.asDiagonal() * stiffness * inv_sqrt.asDiagonal();
  a = 0.5 * (a + a.transpose()).eval();

  EigenPairs out;
  if (n <= 64) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    for (int j = 0; j < k; ++j) {
      out.values.push_back(es.eigenvalues()[j]);
      std::vector<double> v(n);
      for (int i = 0; i < n; ++i) v[i] = es.eigenvectors()(i, j) * inv_sqrt[i];
      out.vectors.push_back(std::move(v));
    }
    return out;
  }

  // Shift-invert subspace iteration on a Cholesky factor of a - sigma I. A
  // successful factorization certifies sigma lies below the spectrum, so the
  // subspace converges to the lowest eigenpairs.
  const double scale = std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
  double sigma = -1e-2;
  Eigen::LLT<Eigen::MatrixXd> chol;
  auto factor = [&](double s) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() -= s;
    chol.compute(shifted);
    return chol.info() == Eigen::Success;
  };
  for (int attempt = 0; !factor(sigma); ++attempt) {
    if (attempt > 60) throw std::runtime_error("lowest_generalized_dense: no shift below the spectrum");
    sigma = 2.0 * sigma - 1e-2 * scale;
  }

  const int p = std::min(n, k + std::max(8, k));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd x(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = dist(rng);
  x.col(0) = inv_sqrt.cwiseInverse();

  Eigen::VectorXd theta;
  int reshifts = 0;
  for (int it = 0;; ++it) {
    const Eigen::MatrixXd y = chol.solve(x);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(y).householderQ() * Eigen::MatrixXd::Identity(n, p);
    const Eigen::MatrixXd aq = a * q;
    Eigen::MatrixXd h = q.transpose() * aq;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(h);
    theta = ritz.eigenvalues();
    x = q * ritz.eigenvectors();
    const Eigen::MatrixXd ax = aq * ritz.eigenvectors();

    bool converged = true;
    for (int j = 0; j < k; ++j) {
      const double res = (ax.col(j) - theta[j] * x.col(j)).norm();
      if (res > std::max(1e-11 * std::max(1.0, std::abs(theta[j])), 1e-14 * scale)) converged = false;
    }
    if (converged) break;
    if (it >= 2000) throw std::runtime_error("lowest_generalized_dense: subspace iteration did not converge");
    // A shift far below the wanted cluster slows convergence; move it up
    // once the lowest Ritz value has settled, if it stays below the spectrum.
    const double target = theta[0] - 1e-2 * (1.0 + std::abs(theta[0]));
    if (reshifts < 2 && it % 10 == 9 && target - sigma > 0.5 * (theta[k - 1] - sigma)) {
      if (factor(target)) {
        sigma = target;
      } else if (!factor(sigma)) {
        throw std::runtime_error("lowest_generalized_dense: refactorization failed");
      }
      ++reshifts;
    }
  }
  for (int j = 0; j < k; ++j) {
    out.values.push_back(theta[j]);
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = x(i, j) * inv_sqrt[i];
    out.vectors.push_back(std::move(v));
  }
  return out;
}

EigenPairs lowest_generalized_iterative(const LinearOperator& stiffness, std::span<const double> mass, int k,
                                        const LinearOperator& preconditioner, const SubspaceOptions& opts) {
  const std::size_t n = mass.size();
  const int p = std::min<int>(k + opts.extra_vectors, static_cast<int>(n));
  if (k < 1 || k > p) throw std::invalid_argument("lowest_generalized_iterative: bad eigenpair count");

  const LinearOperator shifted = [&](std::span<const double> x, std::span<double> y) {
    stiffness(x, y);
    for (std::size_t i = 0; i < n; ++i) y[i] += opts.shift * mass[i] * x[i];
  };

  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (std::size_t i = 0; i < n; ++i) x(i, j) = dist(rng);
  x.col(0).setOnes();

  Eigen::MatrixXd y(n, p), sy(n, p);
  std::vector<double> rhs(n), sol(n), tmp(n);
  Eigen::VectorXd theta;
  for (int it = 0; it < opts.max_iterations; ++it) {
    for (int j = 0; j < p; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        rhs[i] = mass[i] * x(i, j);
        sol[i] = x(i, j) / (1.0 + opts.shift);
      }
      pcg(shifted, preconditioner, rhs, sol, 1e-13, 4000);
      for (std::size_t i = 0; i < n; ++i) y(i, j) = sol[i];
    }
    for (int j = 0; j < p; ++j) {
      for (std::size_t i = 0; i < n; ++i) sol[i] = y(i, j);
      stiffness(sol, tmp);
      for (std::size_t i = 0; i < n; ++i) sy(i, j) = tmp[i];
    }
    const Eigen::Map<const Eigen::VectorXd> m(mass.data(), static_cast<Eigen::Index>(n));
    Eigen::MatrixXd a_small = y.transpose() * sy;
    Eigen::MatrixXd m_small = y.transpose() * m.asDiagonal() * y;
    a_small = 0.5 * (a_small + a_small.transpose()).eval();
    m_small = 0.5 * (m_small + m_small.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(a_small, m_small);
    theta = ritz.eigenvalues();
    x = y * ritz.eigenvectors();
    const Eigen::MatrixXd sx = sy * ritz.eigenvectors();

    bool converged = true;
    for (int j = 0; j < k; ++j) {
      double res = 0.0, nrm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = sx(i, j) - theta[j] * mass[i] * x(i, j);
        res += r * r / mass[i];
        nrm += mass[i] * x(i, j) * x(i, j);
      }
      if (std::sqrt(res / nrm) > opts.tolerance * std::max(1.0, std::abs(theta[j]))) converged = false;
    }
    if (converged) break;
    if (it + 1 == opts.max_iterations)
      throw std::runtime_error("lowest_generalized_iterative: subspace iteration did not converge");
  }
  EigenPairs out;
  for (int j = 0; j < k; ++j) {
    out.values.push_back(theta[j]);
    std::vector<double> v(n);
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += mass[i] * x(i, j) * x(i, j);
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < n; ++i) v[i] = x(i, j) / nrm;
    out.vectors.push_back(std::move(v));
  }
  return out;
}

}  // namespace warprig::linalg
