#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "evidisc/class_stats.hpp"
#include "evidisc/evidence.hpp"

namespace evidisc {

struct PredictiveDistribution {
  Vector probabilities;  // simplex over classes
  Vector log_scores;     // pre-normalization
};

/// Everything predict needs: per-class sufficient statistics, solved
/// hyperparameters, and two caches — the eigenbasis diagonal of the
/// regularized scatter Ξ_z = n_z Ĉ_z + k_z^{-1} I (shares eigenvectors with
/// Ĉ_z) and the per-class log weight
///   log W_z = ln p_z + (d/2) ln(n_z/(n_z+1))
///           + ln Γ((r_z+n_z)/2) − ln Γ((r_z+n_z−d)/2) − (1/2) Σ_i ln(n_z ξ_i + 1/k_z).
struct FittedModel {
  Variant variant = Variant::A;
  int dim = 0;
  int num_classes = 0;
  std::vector<std::string> class_names;
  std::vector<ClassSufficientStats> stats;
  HyperParams params;
  std::vector<double> log_weight;
  std::vector<Vector> scatter_diag;       // per class: n_z ξ_i + 1/k_z
  std::vector<ClassSolve> solve_info;     // empty when hyperparameters were injected
};

/// Build the caches for a model with given statistics and hyperparameters.
inline FittedModel assemble_model(const std::vector<ClassSufficientStats>& stats,
                                  const HyperParams& params,
                                  std::vector<std::string> class_names = {}) {
  if (stats.empty()) throw std::invalid_argument("assemble_model: no classes");
  if (params.per_class.size() != stats.size() || params.class_prior.size() != stats.size())
    throw std::invalid_argument("assemble_model: hyperparameter/class count mismatch");
  FittedModel model;
  model.variant = params.variant;
  model.dim = static_cast<int>(stats[0].mean.size());
  model.num_classes = static_cast<int>(stats.size());
  if (class_names.empty()) {
    for (int z = 1; z <= model.num_classes; ++z) class_names.push_back(std::to_string(z));
  }
  model.class_names = std::move(class_names);
  model.stats = stats;
  model.params = params;
  model.log_weight.resize(stats.size());
  model.scatter_diag.resize(stats.size());
  const int d = model.dim;
  for (std::size_t z = 0; z < stats.size(); ++z) {
    const ClassSufficientStats& s = stats[z];
    const ClassHyperParams& hp = params.per_class[z];
    if (static_cast<int>(s.mean.size()) != d)
      throw std::invalid_argument("assemble_model: inconsistent dimensions across classes");
    if (!(hp.seed_scale > 0.0)) throw std::domain_error("assemble_model: requires k > 0");
    const double n = s.count;
    const double r = hp.dof;
    Vector diag(d);
    double half_log_det = 0.0;
    const double inv_k = 1.0 / hp.seed_scale;
    for (int i = 0; i < d; ++i) {
      diag[i] = n * std::max(s.eigen.eigenvalues[i], 0.0) + inv_k;
      half_log_det += std::log(diag[i]);
    }
    half_log_det *= 0.5;
    const double lw = std::log(params.class_prior[z]) + 0.5 * d * std::log(n / (n + 1.0)) +
                      log_gamma(0.5 * (r + n)) - log_gamma(0.5 * (r + n - d)) - half_log_det;
    if (!std::isfinite(lw)) throw std::runtime_error("assemble_model: non-finite class weight");
    model.scatter_diag[z] = std::move(diag);
    model.log_weight[z] = lw;
  }
  return model;
}

/// Compute statistics, maximize the evidence, precompute the caches.
inline FittedModel fit(const LabeledDataset& data, Variant variant) {
  std::vector<ClassSufficientStats> stats = compute_class_stats(data);
  SolveResult solved = solve_hyperparameters(stats, variant);
  FittedModel model = assemble_model(stats, solved.params, data.class_names);
  model.solve_info = std::move(solved.per_class);
  return model;
}

/// Closed-form predictive distribution over classes for a query point. All
/// score arithmetic stays in log space; the softmax subtracts the max first.
inline PredictiveDistribution predict(const FittedModel& model, std::span<const double> x0) {
  const int d = model.dim;
  if (static_cast<int>(x0.size()) != d)
    throw std::invalid_argument("predict: query dimension mismatch");
  const int c = model.num_classes;
  PredictiveDistribution out;
  out.log_scores.resize(c);
  Vector u(d), rotated(d);
  for (int z = 0; z < c; ++z) {
    const ClassSufficientStats& s = model.stats[z];
    const ClassHyperParams& hp = model.params.per_class[z];
    const double n = s.count;
    for (int i = 0; i < d; ++i) u[i] = x0[i] - s.mean[i];
    // q = u · Ξ^{-1} u through the shared eigenbasis
    const Matrix& basis = s.eigen.eigenvectors;
    double q = 0.0;
    for (int i = 0; i < d; ++i) {
      double w = 0.0;
      for (int j = 0; j < d; ++j) w += basis(j, i) * u[j];
      q += w * w / model.scatter_diag[z][i];
    }
    double score = model.log_weight[z] -
                   0.5 * (hp.dof + n) * std::log1p(n / (n + 1.0) * q);
    if (hp.mean_precision > 0.0) {
      const double xu = dot(s.mean, u);
      score -= hp.mean_precision / (2.0 * (n + 1.0)) * (2.0 * xu + squared_norm(u) / (n + 1.0));
    }
    out.log_scores[z] = score;
  }

  double max_score = out.log_scores[0];
  for (double v : out.log_scores) max_score = std::max(max_score, v);
  out.probabilities.resize(c);
  double total = 0.0;
  for (int z = 0; z < c; ++z) {
    out.probabilities[z] = std::exp(out.log_scores[z] - max_score);
    total += out.probabilities[z];
  }
  for (double& p : out.probabilities) p /= total;
  return out;
}

/// Most probable class label (1-based); ties break toward the lowest index.
inline int classify(const FittedModel& model, std::span<const double> x0) {
  const PredictiveDistribution dist = predict(model, x0);
  int best = 0;
  for (int z = 1; z < model.num_classes; ++z)
    if (dist.probabilities[z] > dist.probabilities[best]) best = z;
  return best + 1;
}

}  // namespace evidisc
