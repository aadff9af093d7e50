#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dss/densities.hpp"
#include "dss/error.hpp"
#include "dss/params.hpp"
#include "dss/penalty.hpp"
#include "dss/threshold.hpp"
#include "dss/types.hpp"

namespace dss {

/// Closed-form update used for the initial state β_0j.
enum class InitialUpdateRule {
  /// Exact maximiser of the t = 0 terms of the expected complete-data log
  /// posterior: numerator weight p*_1j on the slab transition into β_1j.
  kExact,
  /// Numerator weight p*_0j instead.
  kAsPrinted,
};

struct FitOptions {
  int max_iters = 500;
  double tol = 1e-6;
  int sweeps_per_mstep = 1;
  /// Full recomputation of partial residuals every this many sweeps.
  int residual_refresh = 50;
  InitialUpdateRule initial_rule = InitialUpdateRule::kExact;
  /// Diagnostic switch: E-step returns p* ≡ 1 and θ ≡ 1, reducing the fit to
  /// the Gaussian smoother.
  bool all_slab = false;
  /// Starting path; zeros when empty. Must match the data dimensions.
  std::optional<CoefPath> warm_start;
};

namespace detail {

inline void require_centered(const DssParams& params, const char* who) {
  params.validate();
  if (params.phi0 != 0.0)
    throw DomainError(std::string(who) + ": the EM smoother assumes phi0 = 0; center the series externally");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// E-step

/// p*_tj for t ≥ 1 from the conditional slab posterior, p*_0j = θ(β_0j),
/// and θ_tj = θ(β_{t−1,j}).
inline WeightState estep(const CoefPath& path, const Dataset& data, const DssParams& params,
                         bool all_slab = false) {
  detail::require_centered(params, "estep");
  path.check_against(data);
  const Eigen::Index p = path.predictors();
  const Eigen::Index horizon = path.horizon();
  WeightState w{Eigen::MatrixXd(p, horizon + 1), Eigen::MatrixXd(p, horizon + 1)};
  if (all_slab) {
    w.theta.setOnes();
    w.pstar.setOnes();
    return w;
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    w.theta(j, 0) = params.theta_marginal;
    w.pstar(j, 0) = transition_theta(path.beta0(j), params);
    double prev = path.beta0(j);
    for (Eigen::Index t = 1; t <= horizon; ++t) {
      const double cur = path.coefficients(j, t - 1);
      w.theta(j, t) = transition_theta(prev, params);
      w.pstar(j, t) = pstar(cur, prev, params);
      prev = cur;
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// M-step single-site updates

/// Frozen quantities for an interior site 1 ≤ t < T.
struct InteriorSite {
  double x = 0.0;           ///< x_tj
  double z = 0.0;           ///< partial residual z_tj
  double beta_prev = 0.0;   ///< β_{t−1,j}
  double beta_next = 0.0;   ///< β_{t+1,j}
  double pstar = 0.0;       ///< p*_tj
  double pstar_next = 0.0;  ///< p*_{t+1,j}
  double theta_next = 0.0;  ///< θ_{t+1,j}, held at its current value
};

/// Last site t = T: no forward transition.
struct TerminalSite {
  double x = 0.0;
  double z = 0.0;
  double beta_prev = 0.0;
  double pstar = 0.0;
};

/// Initial state t = 0.
struct InitialSite {
  double beta_next = 0.0;   ///< β_1j
  double pstar0 = 0.0;      ///< p*_0j
  double pstar_next = 0.0;  ///< p*_1j
};

struct InitialUpdate {
  double value = 0.0;
  bool degenerate = false;
};

/// Ingredients of the thresholding update β = sign(Z)[|Z| − Λ]₊ / D.
struct SiteTerms {
  double big_z = 0.0;
  double shrink = 0.0;
  double denom = 0.0;
};

inline SiteTerms interior_terms(const InteriorSite& s, const DssParams& params) {
  const double l1 = params.lambda1;
  const double phi = params.phi1;
  const double m = s.pstar_next * (1.0 - s.theta_next) - s.theta_next * (1.0 - s.pstar_next);
  SiteTerms out;
  out.big_z = s.x * s.z + s.pstar * phi / l1 * s.beta_prev + s.pstar_next * phi / l1 * s.beta_next;
  const double w = s.x * s.x + s.pstar / l1 + s.pstar_next * phi * phi / l1;
  out.denom = w + (1.0 - phi * phi) / l1 * m;
  out.shrink = params.lambda0 * ((1.0 - s.pstar) - m);
  return out;
}

inline SiteTerms terminal_terms(const TerminalSite& s, const DssParams& params) {
  const double l1 = params.lambda1;
  SiteTerms out;
  out.big_z = s.x * s.z + s.pstar * params.phi1 / l1 * s.beta_prev;
  out.denom = s.x * s.x + s.pstar / l1;
  out.shrink = params.lambda0 * (1.0 - s.pstar);
  return out;
}

/// Soft-thresholding step; exactly zero when |Z| ≤ Λ.
inline double threshold_update(const SiteTerms& terms) {
  const double mag = std::abs(terms.big_z) - terms.shrink;
  if (!(mag > 0.0)) return 0.0;
  return detail::sign(terms.big_z) * mag / terms.denom;
}

/// One-step-late update for 1 ≤ t < T. Throws NumericalError when the
/// denominator W + (1 − φ1²) M / λ1 is not positive.
inline double mstep_interior(const InteriorSite& site, const DssParams& params) {
  detail::require_centered(params, "mstep_interior");
  const SiteTerms terms = interior_terms(site, params);
  if (!(terms.denom > 0.0))
    throw NumericalError("mstep_interior: nonpositive denominator " + std::to_string(terms.denom));
  return threshold_update(terms);
}

inline double mstep_terminal(const TerminalSite& site, const DssParams& params) {
  detail::require_centered(params, "mstep_terminal");
  const SiteTerms terms = terminal_terms(site, params);
  if (!(terms.denom > 0.0))
    throw NumericalError("mstep_terminal: nonpositive denominator " + std::to_string(terms.denom));
  return threshold_update(terms);
}

/// β_0j = sign(φ1 β_1j)[w φ1|β_1j| − (1 − p*_0j) λ0 λ1]₊ / (p*_1j φ1² + p*_0j (1 − φ1²)),
/// with w = p*_1j (exact) or p*_0j (kAsPrinted).
inline InitialUpdate mstep_initial(const InitialSite& site, const DssParams& params,
                                   InitialUpdateRule rule = InitialUpdateRule::kExact) {
  detail::require_centered(params, "mstep_initial");
  const double phi = params.phi1;
  const double denom = site.pstar_next * phi * phi + site.pstar0 * (1.0 - phi * phi);
  if (!(denom > 0.0)) return {0.0, true};
  const double weight = rule == InitialUpdateRule::kExact ? site.pstar_next : site.pstar0;
  const double pull = phi * site.beta_next;
  const double mag = weight * std::abs(pull) - (1.0 - site.pstar0) * params.lambda0 * params.lambda1;
  if (!(mag > 0.0)) return {0.0, false};
  return {detail::sign(pull) * mag / denom, false};
}

// ---------------------------------------------------------------------------
// Objective

/// Marginal log posterior up to a constant: Gaussian log likelihood with unit
/// variance, the prospective penalty at every t ≥ 1, and the stationary
/// mixture density of β_0.
inline double log_posterior(const CoefPath& path, const Dataset& data, const DssParams& params) {
  params.validate();
  path.check_against(data);
  const Eigen::VectorXd fitted = (data.design.array() * path.coefficients.transpose().array()).rowwise().sum();
  double total = -0.5 * (data.responses - fitted).squaredNorm();
  for (Eigen::Index j = 0; j < path.predictors(); ++j) {
    total += log_stationary_mixture_pdf(path.beta0(j), params);
    double prev = path.beta0(j);
    for (Eigen::Index t = 0; t < path.horizon(); ++t) {
      const double cur = path.coefficients(j, t);
      total += prospective_pen(cur, prev, params);
      prev = cur;
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Fitting loop

/// MAP smoothing by one-step-late EM: alternates an E-step with coordinate
/// sweeps (j outer, t = 0..T inner) until the largest coordinate change in an
/// iteration falls below `tol`.
inline FitResult fit_map(const Dataset& data, const DssParams& params, const FitOptions& options = {}) {
  data.validate();
  detail::require_centered(params, "fit_map");
  if (options.max_iters <= 0 || !(options.tol > 0.0) || options.sweeps_per_mstep <= 0 ||
      options.residual_refresh <= 0)
    throw ConfigError("fit_map: options must be positive");
  const Eigen::Index p = data.predictors();
  const Eigen::Index horizon = data.horizon();
  if (horizon < 1 || p < 1) throw StructuralError("fit_map: empty dataset");

  CoefPath start = options.warm_start ? *options.warm_start : CoefPath::zeros(p, horizon);
  start.check_against(data);
  Eigen::MatrixXd beta = start.stacked();  // p × (T+1)
  const Eigen::MatrixXd& x = data.design;

  auto compute_residual = [&]() -> Eigen::VectorXd {
    return data.responses - (x.array() * beta.rightCols(horizon).transpose().array()).rowwise().sum().matrix();
  };
  Eigen::VectorXd residual = compute_residual();

  FitResult result;
  result.hyperparams = params;
  long sweeps = 0;

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    const WeightState w = estep(CoefPath::from_stacked(beta), data, params, options.all_slab);
    double max_change = 0.0;

    for (int sweep = 0; sweep < options.sweeps_per_mstep; ++sweep) {
      for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index t = 0; t <= horizon; ++t) {
          const double old = beta(j, t);
          double updated = 0.0;
          if (t == 0) {
            const InitialSite site{beta(j, 1), w.pstar(j, 0), w.pstar(j, 1)};
            updated = mstep_initial(site, params, options.initial_rule).value;
          } else {
            const double xtj = x(t - 1, j);
            const double z = residual(t - 1) + xtj * old;
            if (t < horizon) {
              const InteriorSite site{xtj, z, beta(j, t - 1), beta(j, t + 1),
                                      w.pstar(j, t), w.pstar(j, t + 1), w.theta(j, t + 1)};
              SiteTerms terms = interior_terms(site, params);
              if (!(terms.denom > 0.0)) {
                // Hold θ_{t+1} fully constant for this site instead.
                ++result.degenerate_updates;
                terms.denom = xtj * xtj + site.pstar / params.lambda1 +
                              site.pstar_next * params.phi1 * params.phi1 / params.lambda1;
                terms.shrink = params.lambda0 * (1.0 - site.pstar);
              }
              updated = threshold_update(terms);
            } else {
              const TerminalSite site{xtj, z, beta(j, t - 1), w.pstar(j, t)};
              updated = threshold_update(terminal_terms(site, params));
            }
            if (!std::isfinite(updated))
              throw NumericalError("fit_map: non-finite update at (t=" + std::to_string(t) +
                                   ", j=" + std::to_string(j) + ") in iteration " + std::to_string(iter));
            residual(t - 1) -= xtj * (updated - old);
          }
          if (!std::isfinite(updated))
            throw NumericalError("fit_map: non-finite update at (t=0, j=" + std::to_string(j) + ")");
          beta(j, t) = updated;
          max_change = std::max(max_change, std::abs(updated - old));
        }
      }
      if (++sweeps % options.residual_refresh == 0) residual = compute_residual();
    }

    const double objective = log_posterior(CoefPath::from_stacked(beta), data, params);
    if (!std::isfinite(objective)) {
      Eigen::Index bj = 0, bt = 0;
      beta.cwiseAbs().maxCoeff(&bj, &bt);
      throw NumericalError("fit_map: non-finite objective in iteration " + std::to_string(iter) +
                           "; largest coordinate at (t=" + std::to_string(bt) + ", j=" + std::to_string(bj) + ")");
    }
    result.objective_trace.push_back(objective);
    result.iterations = iter;
    result.last_change = max_change;
    if (max_change < options.tol) {
      result.converged = true;
      break;
    }
  }

  result.path = CoefPath::from_stacked(beta);
  result.weights = estep(result.path, data, params, options.all_slab);
  return result;
}

// ---------------------------------------------------------------------------
// Diagnostics

struct ConsistencyReport {
  std::size_t checked = 0;
  double max_abs_discrepancy = 0.0;
  /// Fraction of sampled sites where fit and oracle agree on zero vs nonzero.
  double zero_agreement = 0.0;
  /// Fraction where the signs (−1, 0, +1) agree.
  double sign_agreement = 0.0;
};

/// Compares fitted coordinates with the numeric one-site oracle evaluated on
/// the same partial residuals. `sites` holds (t, j) with 1 ≤ t ≤ T.
inline ConsistencyReport coordinate_consistency_check(const FitResult& fit, const Dataset& data,
                                                      const DssParams& params,
                                                      const std::vector<std::pair<Eigen::Index, Eigen::Index>>& sites,
                                                      const GridSearchOptions& grid = {}) {
  const Eigen::MatrixXd beta = fit.path.stacked();
  const Eigen::Index horizon = data.horizon();
  const Eigen::VectorXd fitted =
      (data.design.array() * fit.path.coefficients.transpose().array()).rowwise().sum();
  ConsistencyReport report;
  std::size_t zero_ok = 0, sign_ok = 0;
  for (auto [t, j] : sites) {
    if (t < 1 || t > horizon || j < 0 || j >= data.predictors())
      throw StructuralError("coordinate_consistency_check: site out of range");
    const double xtj = data.design(t - 1, j);
    if (xtj == 0.0) continue;
    const double z = data.responses(t - 1) - fitted(t - 1) + xtj * beta(j, t);
    const double oracle = t < horizon ? one_site_map(z, xtj, beta(j, t - 1), beta(j, t + 1), params, grid)
                                      : one_site_map_terminal(z, xtj, beta(j, t - 1), params, grid);
    const double mine = beta(j, t);
    ++report.checked;
    report.max_abs_discrepancy = std::max(report.max_abs_discrepancy, std::abs(mine - oracle));
    if ((mine == 0.0) == (oracle == 0.0)) ++zero_ok;
    if (detail::sign(mine) == detail::sign(oracle)) ++sign_ok;
  }
  if (report.checked > 0) {
    report.zero_agreement = static_cast<double>(zero_ok) / static_cast<double>(report.checked);
    report.sign_agreement = static_cast<double>(sign_ok) / static_cast<double>(report.checked);
  }
  return report;
}

}  // namespace dss
