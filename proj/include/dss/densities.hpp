#pragma once

#include <cmath>
#include <numbers>
#include <optional>

#include "dss/error.hpp"
#include "dss/params.hpp"

namespace dss {

namespace detail {

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be positive and finite");
}

/// log(e^a + e^b) without overflow.
inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a == -INFINITY) return a;
  return a + std::log1p(std::exp(b - a));
}

/// Logistic 1 / (1 + e^{-x}) evaluated on the stable branch.
inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(logistic(x)).
inline double log_logistic(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Log densities

/// log of the Laplace spike ψ0(β | λ0) = λ0/2 · exp(−λ0|β|).
inline double log_spike_pdf(double beta, double lambda0) {
  detail::require_positive(lambda0, "lambda0");
  return std::log(0.5 * lambda0) - lambda0 * std::abs(beta);
}

/// log of the Gaussian N(mu, variance) density at beta.
inline double log_normal_pdf(double beta, double mu, double variance) {
  detail::require_positive(variance, "variance");
  const double d = beta - mu;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * d * d / variance;
}

inline double log_slab_cond_pdf(double beta, double mu, double lambda1) {
  detail::require_positive(lambda1, "lambda1");
  return log_normal_pdf(beta, mu, lambda1);
}

/// log ψ1^ST: Gaussian with mean φ0 and variance A = λ1 / (1 − φ1²).
inline double log_slab_stationary_pdf(double beta, const DssParams& params) {
  params.validate();
  return log_normal_pdf(beta, params.phi0, params.stationary_variance());
}

inline double log_stationary_mixture_pdf(double beta, const DssParams& params) {
  return detail::log_add_exp(std::log(params.theta_marginal) + log_slab_stationary_pdf(beta, params),
                             std::log1p(-params.theta_marginal) + log_spike_pdf(beta, params.lambda0));
}

// ---------------------------------------------------------------------------
// Densities

inline double spike_pdf(double beta, double lambda0) { return std::exp(log_spike_pdf(beta, lambda0)); }

inline double slab_cond_pdf(double beta, double mu, double lambda1) {
  return std::exp(log_slab_cond_pdf(beta, mu, lambda1));
}

/// Conditional slab mean μ_t = φ0 + φ1 (β_{t−1} − φ0).
inline double slab_mean(double beta_prev, const DssParams& params) {
  params.validate();
  return params.phi0 + params.phi1 * (beta_prev - params.phi0);
}

inline double slab_stationary_pdf(double beta, const DssParams& params) {
  return std::exp(log_slab_stationary_pdf(beta, params));
}

/// Stationary marginal of the process: Θ ψ1^ST + (1 − Θ) ψ0.
inline double stationary_mixture_pdf(double beta, const DssParams& params) {
  return std::exp(log_stationary_mixture_pdf(beta, params));
}

/// CDF of the stationary marginal, closed form.
inline double stationary_mixture_cdf(double beta, const DssParams& params) {
  params.validate();
  const double sd = std::sqrt(params.stationary_variance());
  const double normal = 0.5 * std::erfc(-(beta - params.phi0) / (sd * std::numbers::sqrt2));
  const double laplace = beta < 0.0 ? 0.5 * std::exp(params.lambda0 * beta)
                                    : 1.0 - 0.5 * std::exp(-params.lambda0 * beta);
  return params.theta_marginal * normal + (1.0 - params.theta_marginal) * laplace;
}

// ---------------------------------------------------------------------------
// Mixing weight

/// Log-odds of the stationary slab versus the spike at beta_prev.
inline double transition_log_odds(double beta_prev, const DssParams& params) {
  return std::log(params.theta_marginal) + log_slab_stationary_pdf(beta_prev, params) -
         std::log1p(-params.theta_marginal) - log_spike_pdf(beta_prev, params.lambda0);
}

/// θ(β_{t−1}): posterior probability that beta_prev came from the stationary slab.
///
/// For finite inputs the logit is finite, so the result lies in (0,1) up to
/// floating-point saturation at extreme |beta_prev|.
inline double transition_theta(double beta_prev, const DssParams& params) {
  return detail::logistic(transition_log_odds(beta_prev, params));
}

/// Argmax of θ(·) over beta_prev ≥ φ0, plus a rival closed form kept for
/// diagnostics only.
struct TurningPoint {
  double argmax = 0.0;
  /// (λ0 + √(2C/A))·A with C = log[(1−Θ)/Θ · λ0/2 · √(2πA)]; empty when 2C/A < 0.
  std::optional<double> as_printed;
};

/// θ has log-odds −(β−φ0)²/(2A) + λ0|β| + const, so on β > 0 the unique
/// stationary point is φ0 + λ0 A.
inline TurningPoint theta_turning_point(const DssParams& params) {
  params.validate();
  const double a = params.stationary_variance();
  TurningPoint tp;
  tp.argmax = params.phi0 + params.lambda0 * a;
  const double c = std::log((1.0 - params.theta_marginal) / params.theta_marginal * params.lambda0 / 2.0 *
                            std::sqrt(2.0 * std::numbers::pi * a));
  if (2.0 * c / a >= 0.0) tp.as_printed = (params.lambda0 + std::sqrt(2.0 * c / a)) * a;
  return tp;
}

}  // namespace dss
