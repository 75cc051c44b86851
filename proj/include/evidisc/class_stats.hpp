#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "evidisc/dataset.hpp"
#include "evidisc/linalg.hpp"
#include "evidisc/matrix.hpp"

namespace evidisc {

/// Per-class sufficient statistics: count n_z, sample mean, sample covariance
/// with divisor n_z, and the cached eigendecomposition of the covariance.
/// Negative eigenvalues (rounding noise on a PSD matrix) are clamped to zero.
struct ClassSufficientStats {
  int count = 0;
  Vector mean;
  Matrix cov;
  SymEigen eigen;
};

namespace detail {

inline SymEigen eig_psd_clamped(const Matrix& cov) {
  SymEigen e = eig_sym(cov);
  for (double& v : e.eigenvalues)
    if (v < 0.0) v = 0.0;
  return e;
}

}  // namespace detail

inline ClassSufficientStats stats_from_moments(int count, Vector mean, Matrix cov) {
  ClassSufficientStats s;
  s.count = count;
  s.mean = std::move(mean);
  s.cov = std::move(cov);
  s.eigen = detail::eig_psd_clamped(s.cov);
  return s;
}

/// Mean and covariance per class; every class 1..C must be present.
inline std::vector<ClassSufficientStats> compute_class_stats(const LabeledDataset& data) {
  validate_dataset(data);
  const std::size_t d = data.dim();
  const int c = data.num_classes;
  const std::vector<int> counts = class_counts(data);
  for (int z = 0; z < c; ++z)
    if (counts[z] == 0)
      throw std::invalid_argument("compute_class_stats: class " + std::to_string(z + 1) +
                                  " has no samples");

  std::vector<Vector> means(c, Vector(d, 0.0));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.x.row(i);
    Vector& m = means[data.y[i] - 1];
    for (std::size_t j = 0; j < d; ++j) m[j] += row[j];
  }
  for (int z = 0; z < c; ++z)
    for (double& v : means[z]) v /= counts[z];

  std::vector<Matrix> covs(c, Matrix(d, d));
  Vector centered(d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int z = data.y[i] - 1;
    const auto row = data.x.row(i);
    for (std::size_t j = 0; j < d; ++j) centered[j] = row[j] - means[z][j];
    Matrix& cv = covs[z];
    for (std::size_t a = 0; a < d; ++a) {
      const double ca = centered[a];
      if (ca == 0.0) continue;
      for (std::size_t b = a; b < d; ++b) cv(a, b) += ca * centered[b];
    }
  }

  std::vector<ClassSufficientStats> out;
  out.reserve(c);
  for (int z = 0; z < c; ++z) {
    Matrix& cv = covs[z];
    for (std::size_t a = 0; a < d; ++a) {
      cv(a, a) /= counts[z];
      for (std::size_t b = a + 1; b < d; ++b) {
        cv(a, b) /= counts[z];
        cv(b, a) = cv(a, b);
      }
    }
    out.push_back(stats_from_moments(counts[z], means[z], std::move(cv)));
  }
  return out;
}

/// Statistics of the class with one member removed, via the second-moment
/// form S = n(Ĉ + X̂X̂ᵀ); the eigendecomposition is recomputed.
inline ClassSufficientStats downdate_stats(const ClassSufficientStats& stats,
                                           std::span<const double> x) {
  const std::size_t d = stats.mean.size();
  if (x.size() != d) throw std::invalid_argument("downdate_stats: dimension mismatch");
  if (stats.count < 2)
    throw std::invalid_argument("downdate_stats: removing the sample would empty the class");
  const int n = stats.count;
  const int n1 = n - 1;

  Vector mean1(d);
  for (std::size_t j = 0; j < d; ++j) mean1[j] = (n * stats.mean[j] - x[j]) / n1;

  Matrix cov1(d, d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      const double second = n * (stats.cov(a, b) + stats.mean[a] * stats.mean[b]);
      const double v = (second - x[a] * x[b]) / n1 - mean1[a] * mean1[b];
      cov1(a, b) = v;
      cov1(b, a) = v;
    }
  return stats_from_moments(n1, std::move(mean1), std::move(cov1));
}

}  // namespace evidisc
