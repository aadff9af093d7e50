#pragma once

#include <cmath>

#include "dss/densities.hpp"
#include "dss/error.hpp"
#include "dss/params.hpp"

namespace dss {

/// Prospective, retrospective, and total shrinkage at one coefficient.
struct ShrinkageBreakdown {
  double prospective = 0.0;
  double retrospective = 0.0;
  double total = 0.0;
};

namespace detail {

/// Log-odds of the conditional slab versus the spike for beta given beta_prev.
inline double conditional_slab_log_odds(double beta, double beta_prev, const DssParams& params) {
  const double logit_theta = transition_log_odds(beta_prev, params);
  return log_logistic(logit_theta) - log_logistic(-logit_theta) +
         log_slab_cond_pdf(beta, slab_mean(beta_prev, params), params.lambda1) -
         log_spike_pdf(beta, params.lambda0);
}

inline void require_nonzero(double beta, const char* who) {
  if (beta == 0.0) throw DomainError(std::string(who) + ": derivative w.r.t. |beta| is undefined at 0");
}

}  // namespace detail

/// log[(1 − θ_t) ψ0(β) + θ_t ψ1(β | μ_t, λ1)] with θ_t and μ_t computed from beta_prev.
inline double prospective_pen(double beta, double beta_prev, const DssParams& params) {
  const double logit_theta = transition_log_odds(beta_prev, params);
  return detail::log_add_exp(
      detail::log_logistic(-logit_theta) + log_spike_pdf(beta, params.lambda0),
      detail::log_logistic(logit_theta) + log_slab_cond_pdf(beta, slab_mean(beta_prev, params), params.lambda1));
}

/// The same log transition density, read as a function of the conditioning value `beta`.
inline double retrospective_pen(double beta_next, double beta, const DssParams& params) {
  return prospective_pen(beta_next, beta, params);
}

/// Pen(β | β_{t−1}, β_{t+1}), normed so that Pen(0 | ·, ·) = 0.
inline double total_pen(double beta, double beta_prev, double beta_next, const DssParams& params) {
  const double at_beta = prospective_pen(beta, beta_prev, params) + retrospective_pen(beta_next, beta, params);
  const double at_zero = prospective_pen(0.0, beta_prev, params) + retrospective_pen(beta_next, 0.0, params);
  return at_beta - at_zero;
}

/// p*_t(β): probability that beta arose from the conditional slab given beta_prev.
inline double pstar(double beta, double beta_prev, const DssParams& params) {
  return detail::logistic(detail::conditional_slab_log_odds(beta, beta_prev, params));
}

/// λ*(β | β_{t−1}) = p* (β − μ_t)/λ1 · sign(β) + (1 − p*) λ0.
inline double prospective_shrinkage(double beta, double beta_prev, const DssParams& params) {
  detail::require_nonzero(beta, "prospective_shrinkage");
  const double p = pstar(beta, beta_prev, params);
  const double mu = slab_mean(beta_prev, params);
  return p * (beta - mu) / params.lambda1 * detail::sign(beta) + (1.0 - p) * params.lambda0;
}

/// ∂θ(β)/∂|β| = θ(1 − θ)[λ0 − sign(β)(β − φ0)/A].
inline double theta_derivative_abs(double beta, const DssParams& params) {
  const double theta = transition_theta(beta, params);
  const double bracket = params.lambda0 - detail::sign(beta) * (beta - params.phi0) / params.stationary_variance();
  return theta * (1.0 - theta) * bracket;
}

/// λ̃*(β | β_{t+1}): shrinkage on beta from the transition into beta_next.
inline double retrospective_shrinkage(double beta, double beta_next, const DssParams& params) {
  detail::require_nonzero(beta, "retrospective_shrinkage");
  const double theta_next = transition_theta(beta, params);
  const double mu_next = slab_mean(beta, params);
  const double p_next = pstar(beta_next, beta, params);
  const double s = detail::sign(beta);
  const double bracket = params.lambda0 - s * (beta - params.phi0) / params.stationary_variance();
  const double mix = (1.0 - p_next) * theta_next - p_next * (1.0 - theta_next);
  return bracket * mix - p_next * params.phi1 * s * (beta_next - mu_next) / params.lambda1;
}

/// Λ* = λ* + λ̃*, equal to −∂Pen/∂|β|.
inline ShrinkageBreakdown total_shrinkage(double beta, double beta_prev, double beta_next, const DssParams& params) {
  ShrinkageBreakdown out;
  out.prospective = prospective_shrinkage(beta, beta_prev, params);
  out.retrospective = retrospective_shrinkage(beta, beta_next, params);
  out.total = out.prospective + out.retrospective;
  return out;
}

}  // namespace dss
