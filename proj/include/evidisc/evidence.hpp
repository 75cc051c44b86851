#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "evidisc/class_stats.hpp"
#include "evidisc/special_functions.hpp"

namespace evidisc {

/// The two closed-form model branches. A carries a flat class-mean prior;
/// B adds a Gaussian mean prior of isotropic precision d/‖X̂_z‖².
enum class Variant { A, B };

inline const char* variant_name(Variant v) { return v == Variant::A ? "A" : "B"; }

inline Variant variant_from_string(const std::string& s) {
  if (s == "A" || s == "a") return Variant::A;
  if (s == "B" || s == "b") return Variant::B;
  throw std::invalid_argument("variant must be A or B");
}

/// Per-class hyperparameters: Wishart seed scale k (seed S = k·I), Wishart
/// degrees of freedom r, and the class-mean prior precision (0 under A).
struct ClassHyperParams {
  double seed_scale = 1.0;    // k_z
  double dof = 1.0;           // r_z
  double mean_precision = 0;  // γ-style precision; 0 for variant A
};

struct HyperParams {
  Variant variant = Variant::A;
  Vector class_prior;                      // p_z, sums to 1
  std::vector<ClassHyperParams> per_class;
};

inline constexpr double kSeedScaleFloor = 1e-12;
inline constexpr double kDofCap = 1e12;

namespace detail {

/// m = n_z for variant A, n_z - 1 for variant B: the sole difference between
/// the two per-class evidence objectives.
inline int evidence_multiplier(int count, Variant v) {
  return v == Variant::A ? count : count - 1;
}

struct EvidenceWorkspace {
  int count = 0;            // n_z
  int dim = 0;              // d
  int mult = 0;             // m
  Vector xi;                // eigenvalues of the class covariance, ascending, >= 0
  double positive_mean = 1.0;  // mean of nonzero eigenvalues (1 if none)

  EvidenceWorkspace(const ClassSufficientStats& s, Variant v)
      : count(s.count),
        dim(static_cast<int>(s.mean.size())),
        mult(evidence_multiplier(s.count, v)),
        xi(s.eigen.eigenvalues) {
    double sum = 0.0;
    int npos = 0;
    for (double& x : xi) {
      if (x < 0.0) x = 0.0;
      if (x > 0.0) {
        sum += x;
        ++npos;
      }
    }
    if (npos > 0) positive_mean = sum / npos;
  }

  // (1/d) Σ 1/(n k ξ_i + 1), in (0, 1]
  double mean_inverse(double k) const {
    double s = 0.0;
    for (double x : xi) s += 1.0 / (count * k * x + 1.0);
    return s / dim;
  }

  // Σ ln(n ξ_i + 1/k)
  double log_det_shifted(double k) const {
    double s = 0.0;
    const double invk = 1.0 / k;
    for (double x : xi) s += std::log(count * x + invk);
    return s;
  }

  // Σ ln(n k ξ_i + 1)
  double log_det_unit(double k) const {
    double s = 0.0;
    for (double x : xi) s += std::log1p(count * k * x);
    return s;
  }

  // Σ_j [ψ((r + m - j + 1)/2) - ψ((r - j + 1)/2)]; needs r > d - 1
  double psi_gap(double r) const {
    double s = 0.0;
    for (int j = 1; j <= dim; ++j)
      s += digamma(0.5 * (r + mult - j + 1)) - digamma(0.5 * (r - j + 1));
    return s;
  }

  // the k-stationarity condition solved for r; +inf when degenerate
  double dof_from_scale(double k) const {
    const double t = mean_inverse(k);
    if (1.0 - t <= 1e-15) return std::numeric_limits<double>::infinity();
    return mult * t / (1.0 - t);
  }
};

}  // namespace detail

/// Reduced per-class evidence objective (terms independent of k, r dropped):
///   Ω̃_z(k, r) = (d r/2) ln k − ln Γ_d((r+m)/2) + ln Γ_d(r/2)
///               + ((r+m)/2) Σ_i ln(n_z ξ_i + 1/k)
/// with m = n_z (A) or n_z − 1 (B). Minimized over k > 0, r ≥ d.
inline double per_class_objective(const ClassSufficientStats& stats, double k, double r,
                                  Variant variant) {
  if (!(k > 0.0)) throw std::domain_error("per_class_objective: requires k > 0");
  const detail::EvidenceWorkspace w(stats, variant);
  const double m = w.mult;
  return 0.5 * w.dim * r * std::log(k) - log_multivariate_gamma(w.dim, 0.5 * (r + m)) +
         log_multivariate_gamma(w.dim, 0.5 * r) + 0.5 * (r + m) * w.log_det_shifted(k);
}

/// Class-mean prior precision for variant B: d/‖X̂_z‖², capped when the mean
/// is numerically zero (the prior then pins the class centre at the origin).
inline double mean_prior_precision(const ClassSufficientStats& stats) {
  const double d = static_cast<double>(stats.mean.size());
  const double x2 = squared_norm(stats.mean);
  if (x2 < 1e-12 * d) return 1e12;
  return d / x2;
}

inline bool has_degenerate_mean(const ClassSufficientStats& stats) {
  return squared_norm(stats.mean) < 1e-12 * stats.mean.size();
}

/// Residuals of the two stationarity conditions of Ω̃_z. Both vanish at an
/// interior optimum:
///   res_k = r − m [d / Σ_i (n_z k ξ_i + 1)^{−1} − 1]^{−1}
///   res_r = (1/d) Σ_j [ψ((r+m−j+1)/2) − ψ((r−j+1)/2)] − (1/d) Σ_i ln(n_z k ξ_i + 1)
struct StationarityResiduals {
  double res_k = 0.0;
  double res_r = 0.0;
};

inline StationarityResiduals stationarity_residuals(const ClassSufficientStats& stats,
                                                    double k, double r, Variant variant) {
  if (!(k > 0.0)) throw std::domain_error("stationarity_residuals: requires k > 0");
  const detail::EvidenceWorkspace w(stats, variant);
  StationarityResiduals res;
  res.res_k = r - w.dof_from_scale(k);
  res.res_r = (w.psi_gap(r) - w.log_det_unit(k)) / w.dim;
  return res;
}

/// One evaluated stationary-point candidate.
struct SolveCandidate {
  enum class Kind { interior, boundary_dof, floor_scale, corner, degenerate };
  double seed_scale = 0.0;
  double dof = 0.0;
  double objective = 0.0;
  Kind kind = Kind::interior;
};

inline const char* candidate_kind_name(SolveCandidate::Kind k) {
  switch (k) {
    case SolveCandidate::Kind::interior: return "interior";
    case SolveCandidate::Kind::boundary_dof: return "boundary-dof";
    case SolveCandidate::Kind::floor_scale: return "floor-scale";
    case SolveCandidate::Kind::corner: return "corner";
    case SolveCandidate::Kind::degenerate: return "degenerate";
  }
  return "?";
}

struct ClassSolve {
  double seed_scale = 0.0;
  double dof = 0.0;
  double mean_precision = 0.0;
  SolveCandidate::Kind kind = SolveCandidate::Kind::interior;
  std::vector<SolveCandidate> candidates;  // everything that converged
  StationarityResiduals residuals;         // at the chosen point
  bool degenerate_mean = false;
  int diverged_starts = 0;
};

namespace detail {

inline void add_candidate(std::vector<SolveCandidate>& cands, double k, double r,
                          SolveCandidate::Kind kind) {
  for (const SolveCandidate& c : cands)
    if (std::abs(c.seed_scale - k) <= 1e-9 * std::max(c.seed_scale, k) &&
        std::abs(c.dof - r) <= 1e-9 * std::max(c.dof, r))
      return;
  SolveCandidate c;
  c.seed_scale = k;
  c.dof = r;
  c.kind = kind;
  cands.push_back(c);
}

/// Geometric bisection in k for a decreasing predicate.
template <typename Fn>
double bisect_scale(double lo, double hi, Fn&& above) {
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (above(mid))
      lo = mid;
    else
      hi = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace detail

/// Evidence maximization for one class: gathers stationary-point candidates
/// (damped alternating fixed-point iteration from a multistart set, a sign-
/// change scan of the stationarity system along the res_k = 0 curve, the
/// r = d boundary family, and the k-floor candidate), evaluates Ω̃_z at each,
/// and returns the minimizer. Ties within 1e-9 go to smaller r, then smaller k.
inline ClassSolve solve_class_hyperparameters(const ClassSufficientStats& stats,
                                              Variant variant) {
  const detail::EvidenceWorkspace w(stats, variant);
  const int d = w.dim;
  const double m = w.mult;

  ClassSolve out;
  out.degenerate_mean = has_degenerate_mean(stats);
  out.mean_precision = variant == Variant::B ? mean_prior_precision(stats) : 0.0;

  if (w.mult == 0) {
    // Variant B with n_z = 1: Ω̃ is identically zero, nothing to optimize.
    out.seed_scale = 1.0;
    out.dof = d;
    out.kind = SolveCandidate::Kind::degenerate;
    out.residuals = StationarityResiduals{};
    SolveCandidate c;
    c.seed_scale = out.seed_scale;
    c.dof = out.dof;
    c.kind = out.kind;
    out.candidates = {c};
    return out;
  }

  std::vector<SolveCandidate> cands;

  // (i) damped alternating iteration of the two stationarity equations
  const double base_scale = 1.0 / (w.count * w.positive_mean);
  for (double mult0 : {0.1, 1.0, 10.0}) {
    double k = std::max(mult0 * base_scale, kSeedScaleFloor);
    double lnk = std::log(k);
    double r = d + 1.0;
    bool converged = false;
    for (int it = 0; it < 500; ++it) {
      const double fp = w.dof_from_scale(k);
      if (!std::isfinite(fp)) break;
      const double r_new = std::clamp(fp, static_cast<double>(d), kDofCap);
      const double target = (w.psi_gap(r_new) - w.log_det_shifted(k)) / d;
      const double lnk_new = lnk + 0.5 * (target - lnk);
      const double k_new = std::clamp(std::exp(lnk_new), kSeedScaleFloor, 1e280);
      const double rel = std::max(std::abs(k_new - k) / std::max(k, 1e-300),
                                  std::abs(r_new - r) / std::max(r, 1e-300));
      k = k_new;
      lnk = std::log(k);
      r = r_new;
      if (rel < 1e-10) {
        converged = true;
        break;
      }
    }
    if (converged && r > d * (1.0 + 1e-9) && r < kDofCap * (1.0 - 1e-9) &&
        k > kSeedScaleFloor * (1.0 + 1e-9))
      detail::add_candidate(cands, k, r, SolveCandidate::Kind::interior);
    else if (!converged)
      ++out.diverged_starts;
  }

  // (ii) boundary family r = d with k solved from res_k = 0,
  //      i.e. mean_inverse(k) = d/(d+m)
  const double boundary_target = d / (d + m);
  double boundary_scale = std::numeric_limits<double>::quiet_NaN();
  {
    double hi = std::max(base_scale, kSeedScaleFloor * 10.0);
    while (w.mean_inverse(hi) > boundary_target && hi < 1e30) hi *= 10.0;
    const double t_lo = w.mean_inverse(kSeedScaleFloor);
    const double t_hi = w.mean_inverse(hi);
    if (t_lo >= boundary_target && t_hi <= boundary_target) {
      boundary_scale = detail::bisect_scale(
          kSeedScaleFloor, hi, [&](double k) { return w.mean_inverse(k) > boundary_target; });
      detail::add_candidate(cands, boundary_scale, d, SolveCandidate::Kind::boundary_dof);
    } else if (t_lo < boundary_target) {
      // Ω̃ increases in k along r = d; the floor corner is the family's optimum.
      detail::add_candidate(cands, kSeedScaleFloor, d, SolveCandidate::Kind::corner);
    }
    // t_hi > target up to 1e30: the family's objective decreases towards
    // k → ∞; no finite candidate from this family.
  }

  // (iii) interior roots of the stationarity system along the res_k = 0 curve:
  //       φ(k) = res_r(k, r(k)) changes sign at an interior optimum. The
  //       damped alternation alone can miss these on spectra with one
  //       dominant eigenvalue, so scan log-spaced k for sign changes and
  //       bisect each bracket.
  {
    const double k_upper = std::isfinite(boundary_scale) ? boundary_scale : 1e30;
    const auto phi = [&](double k) {
      double r = w.dof_from_scale(k);
      if (!std::isfinite(r)) r = kDofCap;
      r = std::clamp(r, static_cast<double>(d), kDofCap);
      return (w.psi_gap(r) - w.log_det_unit(k)) / d;
    };
    constexpr int kScanPoints = 96;
    const double ln_lo = std::log(kSeedScaleFloor);
    const double ln_hi = std::log(k_upper);
    double prev_k = kSeedScaleFloor;
    double prev_phi = phi(prev_k);
    for (int i = 1; i < kScanPoints; ++i) {
      const double cur_k = std::exp(ln_lo + (ln_hi - ln_lo) * i / (kScanPoints - 1));
      const double cur_phi = phi(cur_k);
      if ((prev_phi > 0.0) != (cur_phi > 0.0)) {
        const bool lo_above = prev_phi > 0.0;
        const double root = detail::bisect_scale(
            prev_k, cur_k, [&](double k) { return (phi(k) > 0.0) == lo_above; });
        const double r_root = std::clamp(w.dof_from_scale(root), static_cast<double>(d), kDofCap);
        if (r_root > d * (1.0 + 1e-9) && r_root < kDofCap * (1.0 - 1e-9))
          detail::add_candidate(cands, root, r_root, SolveCandidate::Kind::interior);
      }
      prev_k = cur_k;
      prev_phi = cur_phi;
    }
  }

  // (iv) k at the floor with r from res_k = 0
  {
    const double fp = w.dof_from_scale(kSeedScaleFloor);
    if (std::isfinite(fp))
      detail::add_candidate(cands, kSeedScaleFloor,
                            std::clamp(fp, static_cast<double>(d), kDofCap),
                            SolveCandidate::Kind::floor_scale);
  }

  if (cands.empty())
    throw std::runtime_error(
        std::string("solve_hyperparameters: no candidate converged (variant ") +
        variant_name(variant) + ", n=" + std::to_string(w.count) +
        ", d=" + std::to_string(d) + ", diverged starts " +
        std::to_string(out.diverged_starts) + ")");

  for (SolveCandidate& c : cands)
    c.objective = per_class_objective(stats, c.seed_scale, c.dof, variant);

  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i) {
    const double delta = cands[i].objective - cands[best].objective;
    if (delta < -1e-9) {
      best = i;
    } else if (std::abs(delta) <= 1e-9) {
      if (cands[i].dof < cands[best].dof ||
          (cands[i].dof == cands[best].dof && cands[i].seed_scale < cands[best].seed_scale))
        best = i;
    }
  }

  out.seed_scale = cands[best].seed_scale;
  out.dof = cands[best].dof;
  out.kind = cands[best].kind;
  out.candidates = std::move(cands);
  out.residuals = stationarity_residuals(stats, out.seed_scale, out.dof, variant);
  if (!std::isfinite(out.seed_scale) || !std::isfinite(out.dof))
    throw std::runtime_error("solve_hyperparameters: non-finite solution");
  return out;
}

struct SolveResult {
  HyperParams params;
  std::vector<ClassSolve> per_class;
};

/// Evidence-maximized hyperparameters for every class: p_z = n_z/n, the
/// mean-prior precision from its closed form (variant B), and (k_z, r_z)
/// from the per-class candidate search.
inline SolveResult solve_hyperparameters(const std::vector<ClassSufficientStats>& stats,
                                         Variant variant) {
  if (stats.empty()) throw std::invalid_argument("solve_hyperparameters: no classes");
  SolveResult out;
  out.params.variant = variant;
  long total = 0;
  for (const ClassSufficientStats& s : stats) total += s.count;
  out.params.class_prior.resize(stats.size());
  out.params.per_class.resize(stats.size());
  out.per_class.reserve(stats.size());
  for (std::size_t z = 0; z < stats.size(); ++z) {
    out.params.class_prior[z] = static_cast<double>(stats[z].count) / total;
    ClassSolve solve;
    try {
      solve = solve_class_hyperparameters(stats[z], variant);
    } catch (const std::exception& e) {
      throw std::runtime_error("class " + std::to_string(z + 1) + ": " + e.what());
    }
    out.params.per_class[z] =
        ClassHyperParams{solve.seed_scale, solve.dof, solve.mean_precision};
    out.per_class.push_back(std::move(solve));
  }
  return out;
}

/// r at fixed k from the k-stationarity condition, clamped to [d, cap].
/// This is the grid-protocol rule for choosing r when k is scanned.
inline double dof_at_fixed_scale(const ClassSufficientStats& stats, double k, Variant variant) {
  const detail::EvidenceWorkspace w(stats, variant);
  const double fp = w.dof_from_scale(k);
  if (!std::isfinite(fp)) return kDofCap;
  return std::clamp(fp, static_cast<double>(w.dim), kDofCap);
}

}  // namespace evidisc
