#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dss/em.hpp"
#include "dss/params.hpp"
#include "dss/types.hpp"

namespace dss::io {

inline std::vector<std::string> default_names(Eigen::Index p) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

inline std::vector<std::string> names_or_default(const std::vector<std::string>& names, Eigen::Index p) {
  return static_cast<Eigen::Index>(names.size()) == p ? names : default_names(p);
}

/// Panel layout: t, y, then one column per predictor.
inline void write_dataset_csv(std::ostream& os, const Dataset& data) {
  os.precision(17);
  const auto names = names_or_default(data.column_names, data.predictors());
  os << "t,y";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (Eigen::Index t = 0; t < data.horizon(); ++t) {
    os << t + 1 << ',' << data.responses(t);
    for (Eigen::Index j = 0; j < data.predictors(); ++j) os << ',' << data.design(t, j);
    os << '\n';
  }
}

/// Rows t = 0..T (t = 0 is β_0), one column per predictor.
inline void write_coefficients_csv(std::ostream& os, const CoefPath& path, const std::vector<std::string>& names = {}) {
  os.precision(17);
  const auto cols = names_or_default(names, path.predictors());
  os << 't';
  for (const auto& n : cols) os << ',' << n;
  os << '\n';
  const Eigen::MatrixXd s = path.stacked();
  for (Eigen::Index t = 0; t < s.cols(); ++t) {
    os << t;
    for (Eigen::Index j = 0; j < s.rows(); ++j) os << ',' << s(j, t);
    os << '\n';
  }
}

/// θ_tj for t = 1..T.
inline void write_weights_csv(std::ostream& os, const WeightState& w, const std::vector<std::string>& names = {}) {
  os.precision(17);
  const auto cols = names_or_default(names, w.theta.rows());
  os << 't';
  for (const auto& n : cols) os << ',' << n;
  os << '\n';
  for (Eigen::Index t = 1; t < w.theta.cols(); ++t) {
    os << t;
    for (Eigen::Index j = 0; j < w.theta.rows(); ++j) os << ',' << w.theta(j, t);
    os << '\n';
  }
}

/// Rows t = 1..T of 0/1 support indicators.
inline void write_mask_csv(std::ostream& os, const Eigen::MatrixXi& mask, const std::vector<std::string>& names = {}) {
  const auto cols = names_or_default(names, mask.rows());
  os << 't';
  for (const auto& n : cols) os << ',' << n;
  os << '\n';
  for (Eigen::Index t = 0; t < mask.cols(); ++t) {
    os << t + 1;
    for (Eigen::Index j = 0; j < mask.rows(); ++j) os << ',' << mask(j, t);
    os << '\n';
  }
}

inline nlohmann::json to_json(const DssParams& p) {
  return {{"theta_marginal", p.theta_marginal}, {"lambda0", p.lambda0}, {"lambda1", p.lambda1},
          {"phi0", p.phi0},                     {"phi1", p.phi1},       {"stationary_variance", p.stationary_variance()}};
}

inline DssParams params_from_json(const nlohmann::json& j) {
  DssParams p;
  p.theta_marginal = j.at("theta_marginal").get<double>();
  p.lambda0 = j.at("lambda0").get<double>();
  p.lambda1 = j.at("lambda1").get<double>();
  p.phi0 = j.value("phi0", 0.0);
  p.phi1 = j.at("phi1").get<double>();
  p.validate();
  return p;
}

inline nlohmann::json to_json(const FitResult& fit) {
  return {{"params", to_json(fit.hyperparams)},
          {"iterations", fit.iterations},
          {"converged", fit.converged},
          {"last_change", fit.last_change},
          {"degenerate_updates", fit.degenerate_updates},
          {"final_objective", fit.objective_trace.empty() ? 0.0 : fit.objective_trace.back()},
          {"objective_trace", fit.objective_trace}};
}

}  // namespace dss::io
