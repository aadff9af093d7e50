#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>

#include "dss/error.hpp"
#include "dss/rng.hpp"
#include "dss/types.hpp"

namespace dss::experiments {

/// Layout of the synthetic benchmark: one persisting AR(1) series kept away
/// from zero, a few AR(1) series hard-thresholded to zero near the origin,
/// and the remaining series identically zero.
struct SyntheticDesign {
  Eigen::Index predictors = 50;
  Eigen::Index horizon = 100;
  Eigen::Index intermittent_series = 3;
  double phi1 = 0.98;
  /// Innovation variance of the true coefficient processes.
  double innovation_variance = 0.04;
  double threshold = 0.5;
  long max_attempts = 1000000;

  [[nodiscard]] Eigen::Index signal_series() const { return 1 + intermittent_series; }

  void validate() const {
    if (intermittent_series < 0 || predictors < signal_series() + 1)
      throw ConfigError("synthetic design needs p >= " + std::to_string(signal_series() + 1) +
                        " (signal series plus at least one noise series)");
    if (horizon < 2) throw ConfigError("synthetic design needs T >= 2");
    if (!(std::abs(phi1) < 1.0) || !(innovation_variance > 0.0) || !(threshold >= 0.0))
      throw ConfigError("synthetic design: invalid AR settings");
  }
};

struct SyntheticTruth {
  Dataset dataset;
  CoefPath true_path;
  /// p × T, 1 where the true coefficient is nonzero.
  Eigen::MatrixXi active_mask;
  /// Whole-path draws needed before the persisting series cleared the threshold.
  long rejection_attempts = 0;
};

namespace detail {

/// Stationary AR(1) path β_0..β_T with φ0 = 0.
inline Eigen::VectorXd ar1_path(Rng& rng, Eigen::Index horizon, double phi1, double innovation_variance) {
  Eigen::VectorXd v(horizon + 1);
  const double sd = std::sqrt(innovation_variance);
  v(0) = draw_normal(rng, 0.0, sd / std::sqrt(1.0 - phi1 * phi1));
  for (Eigen::Index t = 1; t <= horizon; ++t) v(t) = phi1 * v(t - 1) + draw_normal(rng, 0.0, sd);
  return v;
}

}  // namespace detail

/// True coefficient path (stream 0 of `seed`) and the rejection count.
inline std::pair<CoefPath, long> simulate_coefficients(const SyntheticDesign& design, std::uint64_t seed) {
  design.validate();
  Rng rng = make_rng(seed, 0);
  const Eigen::Index p = design.predictors;
  const Eigen::Index horizon = design.horizon;
  Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero(p, horizon + 1);

  long attempts = 0;
  for (;;) {
    if (++attempts > design.max_attempts)
      throw ConfigError("simulate_coefficients: persisting series never cleared the threshold");
    const Eigen::VectorXd v = detail::ar1_path(rng, horizon, design.phi1, design.innovation_variance);
    if (v.tail(horizon).cwiseAbs().minCoeff() > design.threshold) {
      stacked.row(0) = v.transpose();
      break;
    }
  }
  for (Eigen::Index j = 1; j <= design.intermittent_series; ++j) {
    Eigen::VectorXd v = detail::ar1_path(rng, horizon, design.phi1, design.innovation_variance);
    for (Eigen::Index t = 0; t <= horizon; ++t)
      if (std::abs(v(t)) < design.threshold) v(t) = 0.0;
    stacked.row(j) = v.transpose();
  }
  return {CoefPath::from_stacked(stacked), attempts};
}

/// Standard-normal design and unit-noise responses y_t = x_t'β_t + ε_t.
inline Dataset simulate_responses(const CoefPath& truth, std::uint64_t seed, std::uint64_t stream = 1) {
  Rng rng = make_rng(seed, stream);
  const Eigen::Index p = truth.predictors();
  const Eigen::Index horizon = truth.horizon();
  Dataset data;
  data.design.resize(horizon, p);
  for (Eigen::Index t = 0; t < horizon; ++t)
    for (Eigen::Index j = 0; j < p; ++j) data.design(t, j) = draw_normal(rng, 0.0, 1.0);
  data.responses.resize(horizon);
  for (Eigen::Index t = 0; t < horizon; ++t)
    data.responses(t) = data.design.row(t).dot(truth.coefficients.col(t)) + draw_normal(rng, 0.0, 1.0);
  data.column_names.reserve(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) data.column_names.push_back("x" + std::to_string(j + 1));
  return data;
}

inline Eigen::MatrixXi support_mask(const CoefPath& path) {
  return (path.coefficients.array() != 0.0).cast<int>();
}

inline SyntheticTruth simulate_synthetic(const SyntheticDesign& design, std::uint64_t seed) {
  auto [path, attempts] = simulate_coefficients(design, seed);
  SyntheticTruth truth;
  truth.dataset = simulate_responses(path, seed);
  truth.active_mask = support_mask(path);
  truth.true_path = std::move(path);
  truth.rejection_attempts = attempts;
  return truth;
}

inline SyntheticTruth simulate_synthetic(Eigen::Index p, Eigen::Index horizon, std::uint64_t seed) {
  SyntheticDesign design;
  design.predictors = p;
  design.horizon = horizon;
  if (p < 5) throw ConfigError("simulate_synthetic: p must be at least 5");
  return simulate_synthetic(design, seed);
}

}  // namespace dss::experiments
