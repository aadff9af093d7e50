#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "dss/error.hpp"
#include "dss/parallel.hpp"
#include "dss/rng.hpp"
#include "dss/types.hpp"

namespace dss {

// ---------------------------------------------------------------------------
// Dynamic linear model (all-slab smoother)

namespace detail {

/// Hessian H and linear term b of the negated all-slab objective
/// ½ Σ(y_t − x_t'β_t)² + Σ (β_t − φβ_{t−1})²/(2λ1) + (1 − φ²) β_0²/(2λ1),
/// with unknowns ordered time-major: index t·p + j for t = 0..T.
inline void dlm_system(const Dataset& data, double phi1, double lambda1, Eigen::SparseMatrix<double>& hessian,
                       Eigen::VectorXd& rhs) {
  const Eigen::Index p = data.predictors();
  const Eigen::Index horizon = data.horizon();
  const Eigen::Index n = p * (horizon + 1);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n * (p + 3)));
  rhs = Eigen::VectorXd::Zero(n);
  const double inv = 1.0 / lambda1;

  for (Eigen::Index j = 0; j < p; ++j) entries.emplace_back(j, j, (1.0 - phi1 * phi1) * inv);
  for (Eigen::Index t = 1; t <= horizon; ++t) {
    const Eigen::Index base = t * p;
    const Eigen::Index prev = (t - 1) * p;
    const auto xt = data.design.row(t - 1);
    for (Eigen::Index a = 0; a < p; ++a) {
      rhs(base + a) += xt(a) * data.responses(t - 1);
      for (Eigen::Index b = 0; b < p; ++b)
        if (xt(a) * xt(b) != 0.0) entries.emplace_back(base + a, base + b, xt(a) * xt(b));
      entries.emplace_back(base + a, base + a, inv);
      entries.emplace_back(prev + a, prev + a, phi1 * phi1 * inv);
      entries.emplace_back(base + a, prev + a, -phi1 * inv);
      entries.emplace_back(prev + a, base + a, -phi1 * inv);
    }
  }
  hessian.resize(n, n);
  hessian.setFromTriplets(entries.begin(), entries.end());
}

}  // namespace detail

/// Posterior mode of the Gaussian dynamic linear model with AR(1) states,
/// unit observation variance, and a stationary initial state. Equivalent to
/// the spike-and-slab smoother with every indicator switched on.
inline CoefPath dlm_fit(const Dataset& data, double phi1, double lambda1) {
  data.validate();
  if (!(std::abs(phi1) < 1.0)) throw DomainError("dlm_fit: |phi1| must be < 1");
  if (!(lambda1 > 0.0)) throw DomainError("dlm_fit: lambda1 must be positive");
  Eigen::SparseMatrix<double> h;
  Eigen::VectorXd b;
  detail::dlm_system(data, phi1, lambda1, h, b);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("dlm_fit: factorisation failed");
  const Eigen::VectorXd sol = solver.solve(b);
  if (solver.info() != Eigen::Success || !sol.allFinite()) throw NumericalError("dlm_fit: solve failed");

  const Eigen::Index p = data.predictors();
  const Eigen::Map<const Eigen::MatrixXd> stacked(sol.data(), p, data.horizon() + 1);
  return CoefPath::from_stacked(stacked);
}

/// Max-norm residual of the DLM normal equations at `path`.
inline double dlm_normal_residual(const Dataset& data, double phi1, double lambda1, const CoefPath& path) {
  Eigen::SparseMatrix<double> h;
  Eigen::VectorXd b;
  detail::dlm_system(data, phi1, lambda1, h, b);
  const Eigen::MatrixXd s = path.stacked();
  const Eigen::Map<const Eigen::VectorXd> v(s.data(), s.size());
  return (h * v - b).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// LASSO

struct LassoFit {
  Eigen::VectorXd coefficients;
  double lambda = 0.0;
  double kkt_residual = 0.0;
  int passes = 0;
};

struct LassoOptions {
  double kkt_tol = 1e-6;
  int max_passes = 100000;
};

/// Largest violation of the optimality conditions of
/// ½‖y − Xβ‖² + λ‖β‖₁ at beta.
inline double lasso_kkt_residual(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                                 double lambda) {
  const Eigen::VectorXd grad = x.transpose() * (y - x * beta);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double v = beta(j) != 0.0 ? std::abs(grad(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0))
                                     : std::max(0.0, std::abs(grad(j)) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

inline double lasso_objective(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                              double lambda) {
  return 0.5 * (y - x * beta).squaredNorm() + lambda * beta.lpNorm<1>();
}

namespace detail {

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

/// Sufficient statistics X'X and X'y for coordinate descent in covariance form.
struct LassoGram {
  Eigen::MatrixXd gram;
  Eigen::VectorXd xty;

  LassoGram(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) : gram(x.transpose() * x), xty(x.transpose() * y) {}
};

/// KKT violation from the gradient g = X'(y − Xβ).
inline double kkt_from_gradient(const Eigen::VectorXd& grad, const Eigen::VectorXd& beta, double lambda) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double v = beta(j) != 0.0 ? std::abs(grad(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0))
                                     : std::max(0.0, std::abs(grad(j)) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

/// Cyclic coordinate descent from `beta`. Full sweeps alternate with sweeps
/// restricted to the current nonzero set until the KKT residual drops below
/// tolerance; `passes` counts full sweeps.
inline LassoFit lasso_descend(const LassoGram& g, double lambda, Eigen::VectorXd beta, const LassoOptions& opt) {
  const Eigen::Index p = beta.size();
  Eigen::VectorXd grad = g.xty - g.gram * beta;
  auto update = [&](Eigen::Index j) {
    const double hjj = g.gram(j, j);
    if (hjj == 0.0) {
      beta(j) = 0.0;
      return;
    }
    const double old = beta(j);
    const double updated = soft_threshold(grad(j) + hjj * old, lambda) / hjj;
    if (updated != old) {
      grad.noalias() -= (updated - old) * g.gram.col(j);
      beta(j) = updated;
    }
  };

  auto try_active_solve = [&](const std::vector<Eigen::Index>& set) {
    const auto k = static_cast<Eigen::Index>(set.size());
    if (k == 0) return false;
    Eigen::MatrixXd gaa(k, k);
    Eigen::VectorXd rhs(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      const Eigen::Index j = set[static_cast<std::size_t>(a)];
      if (beta(j) == 0.0) return false;
      rhs(a) = g.xty(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0);
      for (Eigen::Index b = 0; b < k; ++b) gaa(a, b) = g.gram(j, set[static_cast<std::size_t>(b)]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gaa);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::VectorXd sol = llt.solve(rhs);
    if (!sol.allFinite()) return false;
    // Move toward the fixed-sign minimiser, stopping where a coordinate
    // first reaches zero; inside one orthant this can only lower the objective.
    double step = 1.0;
    Eigen::Index hit = -1;
    for (Eigen::Index a = 0; a < k; ++a) {
      const double b0 = beta(set[static_cast<std::size_t>(a)]);
      if (sol(a) * b0 <= 0.0) {
        const double t = b0 / (b0 - sol(a));
        if (t < step) step = t, hit = a;
      }
    }
    Eigen::VectorXd candidate = beta;
    for (Eigen::Index a = 0; a < k; ++a) {
      const Eigen::Index j = set[static_cast<std::size_t>(a)];
      candidate(j) = a == hit ? 0.0 : beta(j) + step * (sol(a) - beta(j));
    }
    auto objective = [&](const Eigen::VectorXd& b) {
      return 0.5 * b.dot(g.gram * b) - g.xty.dot(b) + lambda * b.lpNorm<1>();
    };
    if (!(objective(candidate) < objective(beta))) return false;
    beta = std::move(candidate);
    grad = g.xty - g.gram * beta;
    return hit < 0;
  };

  LassoFit fit;
  fit.lambda = lambda;
  std::vector<Eigen::Index> active;
  for (int pass = 1; pass <= opt.max_passes; ++pass) {
    for (Eigen::Index j = 0; j < p; ++j) update(j);
    fit.passes = pass;
    grad = g.xty - g.gram * beta;  // incremental updates drift
    fit.kkt_residual = kkt_from_gradient(grad, beta, lambda);
    if (fit.kkt_residual < opt.kkt_tol) break;

    active.clear();
    for (Eigen::Index j = 0; j < p; ++j)
      if (beta(j) != 0.0) active.push_back(j);
    for (int inner = 1; inner <= opt.max_passes; ++inner) {
      for (Eigen::Index j : active) update(j);
      double worst = 0.0;
      for (Eigen::Index j : active)
        worst = std::max(worst, beta(j) != 0.0 ? std::abs(grad(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0))
                                               : std::max(0.0, std::abs(grad(j)) - lambda));
      if (worst < 0.1 * opt.kkt_tol) break;
      // Slow progress usually means an ill-conditioned active block; once the
      // signs have settled the restricted stationarity equations give the
      // solution directly.
      if (inner % 25 == 0 && try_active_solve(active)) break;
      if (inner % 25 == 0) {
        active.erase(std::remove_if(active.begin(), active.end(), [&](Eigen::Index j) { return beta(j) == 0.0; }),
                     active.end());
      }
    }
  }
  fit.coefficients = std::move(beta);
  return fit;
}

}  // namespace detail

/// Static LASSO ½‖y − Xβ‖² + λ‖β‖₁ by cyclic coordinate descent.
inline LassoFit lasso_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, double lambda,
                          const LassoOptions& opt = {}, const Eigen::VectorXd* warm = nullptr) {
  if (!(lambda > 0.0)) throw DomainError("lasso_fit: lambda must be positive");
  if (x.rows() == 0 || x.cols() == 0 || x.rows() != y.size()) throw StructuralError("lasso_fit: bad dimensions");
  if (!y.allFinite() || !x.allFinite()) throw StructuralError("lasso_fit: non-finite inputs");
  Eigen::VectorXd start = warm ? *warm : Eigen::VectorXd::Zero(x.cols());
  LassoFit fit = detail::lasso_descend(detail::LassoGram(y, x), lambda, std::move(start), opt);
  fit.kkt_residual = lasso_kkt_residual(y, x, fit.coefficients, lambda);
  return fit;
}

/// 100 log-spaced values from max_j |X_j'y| down to `ratio` times that.
inline std::vector<double> lasso_lambda_grid(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                             std::size_t count = 100, double ratio = 1e-4) {
  const double lmax = (x.transpose() * y).cwiseAbs().maxCoeff();
  std::vector<double> grid(count);
  if (count == 1) return {lmax};
  for (std::size_t k = 0; k < count; ++k)
    grid[k] = lmax * std::pow(ratio, static_cast<double>(k) / static_cast<double>(count - 1));
  return grid;
}

struct CvOptions {
  int folds = 10;
  std::uint64_t seed = 2024;
  std::size_t grid_size = 100;
  double grid_ratio = 1e-4;
  LassoOptions solver{};
};

struct CvResult {
  double lambda = 0.0;
  std::vector<double> lambdas;
  std::vector<double> cv_error;
  LassoFit fit;
};

/// Random-partition assignment of n rows to K folds.
inline std::vector<int> cv_fold_ids(Eigen::Index n, int folds, std::uint64_t seed) {
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = static_cast<int>(i % folds);
  Rng rng = make_rng(seed, static_cast<std::uint64_t>(n));
  std::shuffle(ids.begin(), ids.end(), rng);
  return ids;
}

/// K-fold cross-validated LASSO: picks λ minimising mean held-out squared
/// error over the grid, then refits on all rows.
inline CvResult lasso_cv(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const CvOptions& opt = {}) {
  const Eigen::Index n = x.rows();
  if (opt.folds < 2 || opt.folds > n) throw ConfigError("lasso_cv: need 2 <= folds <= rows");
  CvResult out;
  out.lambdas = lasso_lambda_grid(y, x, opt.grid_size, opt.grid_ratio);
  out.cv_error.assign(out.lambdas.size(), 0.0);

  if (out.lambdas.front() == 0.0) {
    out.lambda = std::numeric_limits<double>::min();
    out.fit = LassoFit{Eigen::VectorXd::Zero(x.cols()), out.lambda, 0.0, 0};
    return out;
  }

  const std::vector<int> ids = cv_fold_ids(n, opt.folds, opt.seed);
  for (int k = 0; k < opt.folds; ++k) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index i = 0; i < n; ++i) (ids[static_cast<std::size_t>(i)] == k ? test : train).push_back(i);
    const Eigen::MatrixXd xtr = x(train, Eigen::all);
    const Eigen::VectorXd ytr = y(train);
    const Eigen::MatrixXd xte = x(test, Eigen::all);
    const Eigen::VectorXd yte = y(test);
    const detail::LassoGram gram(ytr, xtr);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
    for (std::size_t l = 0; l < out.lambdas.size(); ++l) {
      beta = detail::lasso_descend(gram, out.lambdas[l], beta, opt.solver).coefficients;
      out.cv_error[l] += (yte - xte * beta).squaredNorm() / static_cast<double>(n);
    }
  }
  const auto best = std::min_element(out.cv_error.begin(), out.cv_error.end()) - out.cv_error.begin();
  out.lambda = out.lambdas[static_cast<std::size_t>(best)];

  const detail::LassoGram gram(y, x);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  for (std::size_t l = 0; l < static_cast<std::size_t>(best); ++l)
    beta = detail::lasso_descend(gram, out.lambdas[l], beta, opt.solver).coefficients;
  out.fit = detail::lasso_descend(gram, out.lambda, beta, opt.solver);
  out.fit.kkt_residual = lasso_kkt_residual(y, x, out.fit.coefficients, out.lambda);
  return out;
}

struct ExpandingOptions {
  CvOptions cv{};
  /// First window end; earlier columns copy this fit.
  Eigen::Index t_min = 20;
  std::size_t workers = 1;
};

/// Refits the CV-tuned LASSO on rows 1..t for each t ≥ t_min; column t−1 of
/// the returned path holds that fit.
inline CoefPath lasso_expanding_path(const Dataset& data, const ExpandingOptions& opt = {}) {
  data.validate();
  const Eigen::Index horizon = data.horizon();
  if (opt.t_min < opt.cv.folds + 1)
    throw ConfigError("lasso_expanding_path: t_min must be at least folds + 1");
  if (horizon < opt.t_min) throw ConfigError("lasso_expanding_path: fewer rows than t_min");

  CoefPath path = CoefPath::zeros(data.predictors(), horizon);
  const auto first = static_cast<std::size_t>(opt.t_min);
  const std::size_t count = static_cast<std::size_t>(horizon) - first + 1;
  parallel_for(count, opt.workers, [&](std::size_t k) {
    const Eigen::Index t = opt.t_min + static_cast<Eigen::Index>(k);
    path.coefficients.col(t - 1) = lasso_cv(data.responses.head(t), data.design.topRows(t), opt.cv).fit.coefficients;
  });
  for (Eigen::Index t = 0; t < opt.t_min - 1; ++t) path.coefficients.col(t) = path.coefficients.col(opt.t_min - 1);
  path.beta0 = path.coefficients.col(opt.t_min - 1);
  return path;
}

}  // namespace dss
