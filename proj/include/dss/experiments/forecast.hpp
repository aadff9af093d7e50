#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dss/baselines.hpp"
#include "dss/densities.hpp"
#include "dss/em.hpp"
#include "dss/experiments/metrics.hpp"
#include "dss/parallel.hpp"
#include "dss/types.hpp"

namespace dss::experiments {

/// How a fitted state β̂_T is carried to T+1.
enum class Propagation {
  /// E[β_{T+1} | β̂_T] = θ(β̂_T) φ1 β̂_T under the process transition.
  kConditionalMean,
  /// β̂_{T+1} = β̂_T.
  kPlugIn,
};

/// One-step-ahead prediction from the last column of `path`.
inline double forecast_one_step(const CoefPath& path, const Eigen::VectorXd& x_next, const DssParams& params,
                                Propagation rule = Propagation::kConditionalMean) {
  if (x_next.size() != path.predictors() || path.horizon() < 1)
    throw StructuralError("forecast_one_step: dimension mismatch");
  const Eigen::VectorXd last = path.coefficients.col(path.horizon() - 1);
  if (rule == Propagation::kPlugIn) return x_next.dot(last);
  double yhat = 0.0;
  for (Eigen::Index j = 0; j < last.size(); ++j)
    yhat += x_next(j) * transition_theta(last(j), params) * slab_mean(last(j), params);
  return yhat;
}

/// A forecasting method refitted on every expanding window.
class ForecastMethod {
 public:
  virtual ~ForecastMethod() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  /// Forecast y at the row after `train`, given that row's predictors.
  virtual double forecast(const Dataset& train, const Eigen::VectorXd& x_next) = 0;
};

class DssForecaster final : public ForecastMethod {
 public:
  DssForecaster(DssParams params, FitOptions options = {}, bool warm_start = false,
                Propagation rule = Propagation::kConditionalMean)
      : params_(params), options_(std::move(options)), warm_start_(warm_start), rule_(rule) {}

  [[nodiscard]] std::string name() const override { return "dss"; }

  double forecast(const Dataset& train, const Eigen::VectorXd& x_next) override {
    FitOptions opts = options_;
    if (warm_start_ && previous_ && previous_->horizon() + 1 == train.horizon()) {
      CoefPath start = *previous_;
      start.coefficients.conservativeResize(Eigen::NoChange, train.horizon());
      start.coefficients.col(train.horizon() - 1) = start.coefficients.col(train.horizon() - 2);
      opts.warm_start = std::move(start);
    }
    const FitResult fit = fit_map(train, params_, opts);
    previous_ = fit.path;
    return forecast_one_step(fit.path, x_next, params_, rule_);
  }

 private:
  DssParams params_;
  FitOptions options_;
  bool warm_start_;
  Propagation rule_;
  std::optional<CoefPath> previous_;
};

class DlmForecaster final : public ForecastMethod {
 public:
  DlmForecaster(double phi1, double lambda1) : phi1_(phi1), lambda1_(lambda1) {}
  [[nodiscard]] std::string name() const override { return "dlm"; }

  double forecast(const Dataset& train, const Eigen::VectorXd& x_next) override {
    const CoefPath path = dlm_fit(train, phi1_, lambda1_);
    return phi1_ * x_next.dot(path.coefficients.col(path.horizon() - 1));
  }

 private:
  double phi1_;
  double lambda1_;
};

class LassoForecaster final : public ForecastMethod {
 public:
  explicit LassoForecaster(CvOptions cv = {}) : cv_(cv) {}
  [[nodiscard]] std::string name() const override { return "lasso"; }

  double forecast(const Dataset& train, const Eigen::VectorXd& x_next) override {
    return x_next.dot(lasso_cv(train.responses, train.design, cv_).fit.coefficients);
  }

 private:
  CvOptions cv_;
};

struct MethodForecasts {
  std::string method;
  /// y_{t+1} − ŷ_{t+1} for each evaluated t; NaN where the method failed.
  std::vector<double> errors;
  std::vector<double> msfe;
  double final_msfe = std::numeric_limits<double>::quiet_NaN();
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;
  double runtime_seconds = 0.0;
};

struct ForecastReport {
  Eigen::Index split = 0;
  std::vector<MethodForecasts> methods;

  [[nodiscard]] bool partial() const {
    for (const auto& m : methods)
      if (m.failures > 0) return true;
    return false;
  }
};

/// Expanding-window one-step-ahead evaluation: for t = split..T−1 every
/// method is fitted on rows 1..t only and predicts row t+1.
inline ForecastReport run_forecast_experiment(const Dataset& data, Eigen::Index split,
                                              const std::vector<std::shared_ptr<ForecastMethod>>& methods,
                                              std::size_t workers = 1) {
  data.validate();
  const Eigen::Index horizon = data.horizon();
  if (split <= 1 || split >= horizon) throw ConfigError("run_forecast_experiment: split must lie in (1, T)");

  ForecastReport report;
  report.split = split;
  report.methods.resize(methods.size());
  parallel_for(methods.size(), workers, [&](std::size_t m) {
    MethodForecasts& out = report.methods[m];
    out.method = methods[m]->name();
    const auto start = std::chrono::steady_clock::now();
    std::vector<double> observed;
    for (Eigen::Index t = split; t < horizon; ++t) {
      const Dataset train = data.head(t);
      const Eigen::VectorXd x_next = data.design.row(t).transpose();
      try {
        const double yhat = methods[m]->forecast(train, x_next);
        if (!std::isfinite(yhat)) throw NumericalError("non-finite forecast");
        out.errors.push_back(data.responses(t) - yhat);
        observed.push_back(out.errors.back());
      } catch (const std::exception& e) {
        out.errors.push_back(std::numeric_limits<double>::quiet_NaN());
        ++out.failures;
        out.failure_messages.push_back("t=" + std::to_string(t) + ": " + e.what());
      }
    }
    if (!observed.empty()) {
      out.msfe = msfe_path(observed);
      out.final_msfe = out.msfe.back();
    }
    out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return report;
}

}  // namespace dss::experiments
