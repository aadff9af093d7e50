#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "dss/error.hpp"
#include "dss/params.hpp"

namespace dss {

/// Responses y (length T) and design X (T × p).
struct Dataset {
  Eigen::VectorXd responses;
  Eigen::MatrixXd design;
  std::vector<std::string> column_names;

  [[nodiscard]] Eigen::Index horizon() const { return responses.size(); }
  [[nodiscard]] Eigen::Index predictors() const { return design.cols(); }

  void validate() const {
    if (design.rows() != responses.size())
      throw StructuralError("Dataset: design has " + std::to_string(design.rows()) + " rows but " +
                            std::to_string(responses.size()) + " responses");
    if (!column_names.empty() && static_cast<Eigen::Index>(column_names.size()) != design.cols())
      throw StructuralError("Dataset: column_names length does not match design columns");
    if (!responses.allFinite() || !design.allFinite()) throw StructuralError("Dataset: non-finite entries");
  }

  /// Rows 0..rows-1 only.
  [[nodiscard]] Dataset head(Eigen::Index rows) const {
    if (rows < 0 || rows > horizon()) throw StructuralError("Dataset::head: row count out of range");
    return Dataset{responses.head(rows), design.topRows(rows), column_names};
  }
};

/// Coefficient trajectory: β_0 (length p) and B (p × T), column t−1 holding β_t.
struct CoefPath {
  Eigen::VectorXd beta0;
  Eigen::MatrixXd coefficients;

  static CoefPath zeros(Eigen::Index p, Eigen::Index horizon) {
    return CoefPath{Eigen::VectorXd::Zero(p), Eigen::MatrixXd::Zero(p, horizon)};
  }

  [[nodiscard]] Eigen::Index predictors() const { return coefficients.rows(); }
  [[nodiscard]] Eigen::Index horizon() const { return coefficients.cols(); }

  /// p × (T+1) matrix with β_0 in column 0.
  [[nodiscard]] Eigen::MatrixXd stacked() const {
    Eigen::MatrixXd s(predictors(), horizon() + 1);
    s.col(0) = beta0;
    s.rightCols(horizon()) = coefficients;
    return s;
  }

  static CoefPath from_stacked(const Eigen::MatrixXd& s) {
    return CoefPath{s.col(0), s.rightCols(s.cols() - 1)};
  }

  void check_against(const Dataset& data) const {
    if (beta0.size() != coefficients.rows() || coefficients.rows() != data.predictors() ||
        coefficients.cols() != data.horizon())
      throw StructuralError("CoefPath: dimensions do not match the dataset");
  }
};

/// Mixing weights θ_tj and conditional slab probabilities p*_tj, both p × (T+1).
///
/// Column t ≥ 1 of `theta` is θ(β_{t−1}); column 0 holds the prior weight Θ of
/// the initial indicator. Column 0 of `pstar` is p*_0j = θ(β_0j).
struct WeightState {
  Eigen::MatrixXd theta;
  Eigen::MatrixXd pstar;
};

struct FitResult {
  CoefPath path;
  WeightState weights;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  double last_change = 0.0;
  /// Coordinate updates where the one-step-late denominator was nonpositive
  /// and the fully frozen update was used instead.
  long degenerate_updates = 0;
  DssParams hyperparams;
};

}  // namespace dss
