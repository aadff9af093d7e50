#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "dss/error.hpp"

namespace dss {

/// Hyperparameters of the dynamic spike-and-slab process.
///
/// `theta_marginal` is the marginal slab weight, `lambda0` the Laplace spike
/// rate, `lambda1` the conditional slab variance, and (`phi0`, `phi1`) the
/// mean and autoregression coefficient of the slab AR(1) process.
struct DssParams {
  double theta_marginal = 0.9;
  double lambda0 = 1.0;
  double lambda1 = 1.9;
  double phi0 = 0.0;
  double phi1 = 0.9;

  /// Throws DomainError unless 0 < Θ < 1, λ0 > 0, λ1 > 0, |φ1| < 1.
  void validate() const {
    auto fail = [](const std::string& what) { throw DomainError("DssParams: " + what); };
    if (!(theta_marginal > 0.0 && theta_marginal < 1.0)) fail("theta_marginal must lie in (0,1)");
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) fail("lambda0 must be positive");
    if (!(lambda1 > 0.0) || !std::isfinite(lambda1)) fail("lambda1 must be positive");
    if (!std::isfinite(phi0)) fail("phi0 must be finite");
    if (!(std::abs(phi1) < 1.0)) fail("|phi1| must be < 1");
  }

  /// Stationary slab variance A = λ1 / (1 − φ1²).
  [[nodiscard]] double stationary_variance() const { return lambda1 / (1.0 - phi1 * phi1); }

  /// Builds the parameter set from the (φ1, λ0, A, Θ) tuple used to label
  /// experiment grid cells, with λ1 = A (1 − φ1²) and φ0 = 0.
  static DssParams from_grid(double phi1, double lambda0, double stationary_var, double theta) {
    DssParams p{theta, lambda0, stationary_var * (1.0 - phi1 * phi1), 0.0, phi1};
    p.validate();
    return p;
  }

  [[nodiscard]] std::string label() const {
    std::ostringstream os;
    os << "{" << phi1 << ", " << lambda0 << ", " << stationary_variance() << ", " << theta_marginal << "}";
    return os.str();
  }
};

}  // namespace dss
