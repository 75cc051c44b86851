#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "evidisc/matrix.hpp"

namespace evidisc {

/// Eigendecomposition of a symmetric matrix: eigenvalues ascending,
/// eigenvector i stored as column i of `eigenvectors`.
struct SymEigen {
  Vector eigenvalues;
  Matrix eigenvectors;
};

namespace detail {

inline double offdiag_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t p = 0; p + 1 < a.rows(); ++p)
    for (std::size_t q = p + 1; q < a.cols(); ++q) s += 2.0 * a(p, q) * a(p, q);
  return std::sqrt(s);
}

}  // namespace detail

/// Cyclic Jacobi rotations. Converged when the off-diagonal Frobenius norm
/// drops below 1e-12 · ‖M‖_F; capped at 100 sweeps.
inline SymEigen eig_sym(const Matrix& m) {
  const std::size_t n = m.rows();
  if (n == 0 || m.cols() != n) throw std::invalid_argument("eig_sym: matrix must be square");
  const double scale = max_abs(m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * std::max(scale, 1e-300))
        throw std::invalid_argument("eig_sym: matrix is not symmetric");

  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
  Matrix v = Matrix::identity(n);

  const double fro = frobenius_norm(a);
  const double threshold = 1e-12 * fro;
  bool converged = (n == 1) || detail::offdiag_norm(a) <= threshold;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
        double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        const double h = t * apq;
        a(p, p) -= h;
        a(q, q) += h;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == p || j == q) continue;
          const double ajp = a(j, p), ajq = a(j, q);
          a(j, p) = ajp - s * (ajq + tau * ajp);
          a(p, j) = a(j, p);
          a(j, q) = ajq + s * (ajp - tau * ajq);
          a(q, j) = a(j, q);
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double vjp = v(j, p), vjq = v(j, q);
          v(j, p) = vjp - s * (vjq + tau * vjp);
          v(j, q) = vjq + s * (vjp - tau * vjq);
        }
      }
    }
    converged = detail::offdiag_norm(a) <= threshold;
  }
  if (!converged) throw std::runtime_error("eig_sym: Jacobi iteration failed to converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&a](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  SymEigen out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    out.eigenvalues[idx] = a(order[idx], order[idx]);
    for (std::size_t j = 0; j < n; ++j) out.eigenvectors(j, idx) = v(j, order[idx]);
  }
  return out;
}

/// Lower-triangular Cholesky factor of a symmetric PSD matrix. Small negative
/// pivots (rounding noise) are clamped; pivots below -1e-8 · ‖M‖_max fail.
inline Matrix cholesky(const Matrix& m) {
  const std::size_t n = m.rows();
  if (n == 0 || m.cols() != n) throw std::invalid_argument("cholesky: matrix must be square");
  const double scale = std::max(max_abs(m), 1e-300);
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (pivot < -1e-8 * scale)
      throw std::runtime_error("cholesky: matrix is not positive semidefinite");
    const double ljj = std::sqrt(std::max(pivot, 0.0));
    l(j, j) = ljj;
    if (ljj <= 1e-14 * std::sqrt(scale)) {
      l(j, j) = 0.0;  // rank-deficient column
      continue;
    }
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

}  // namespace evidisc
