#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "dss/densities.hpp"
#include "dss/error.hpp"
#include "dss/params.hpp"
#include "dss/rng.hpp"

namespace dss {

/// One realisation β_0..β_T of the process with regimes γ_1..γ_T and the
/// weights θ_t = θ(β_{t−1}) that generated them.
struct DssPath {
  std::vector<double> values;
  std::vector<int> regimes;
  std::vector<double> weights;

  [[nodiscard]] std::size_t horizon() const { return regimes.size(); }
};

/// Draws β_0 from the stationary mixture, then for t = 1..T draws
/// γ_t ~ Bernoulli(θ(β_{t−1})) and β_t from the spike or from N(μ_t, λ1).
inline DssPath sample_dss_path(const DssParams& params, std::size_t horizon, std::uint64_t seed) {
  params.validate();
  if (horizon == 0) throw ConfigError("sample_dss_path: horizon must be positive");

  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double slab_sd = std::sqrt(params.lambda1);
  const double stat_sd = std::sqrt(params.stationary_variance());

  DssPath path;
  path.values.reserve(horizon + 1);
  path.regimes.reserve(horizon);
  path.weights.reserve(horizon);

  const bool slab0 = unif(rng) < params.theta_marginal;
  path.values.push_back(slab0 ? draw_normal(rng, params.phi0, stat_sd) : draw_laplace(rng, params.lambda0));

  for (std::size_t t = 1; t <= horizon; ++t) {
    const double prev = path.values.back();
    const double theta = transition_theta(prev, params);
    const int gamma = unif(rng) < theta ? 1 : 0;
    const double beta = gamma ? draw_normal(rng, slab_mean(prev, params), slab_sd)
                              : draw_laplace(rng, params.lambda0);
    path.values.push_back(beta);
    path.regimes.push_back(gamma);
    path.weights.push_back(theta);
  }
  return path;
}

/// CSV with columns t,beta,gamma,theta; the t = 0 row leaves gamma and theta empty.
inline void write_path_csv(std::ostream& os, const DssPath& path) {
  os.precision(17);
  os << "t,beta,gamma,theta\n";
  os << 0 << ',' << path.values.at(0) << ",,\n";
  for (std::size_t t = 1; t < path.values.size(); ++t)
    os << t << ',' << path.values[t] << ',' << path.regimes[t - 1] << ',' << path.weights[t - 1] << '\n';
}

}  // namespace dss
