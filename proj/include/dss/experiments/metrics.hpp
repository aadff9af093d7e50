#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dss/error.hpp"
#include "dss/types.hpp"

namespace dss::experiments {

/// Which coefficient rows a metric covers.
enum class Subset { kAll, kSignal, kNoise };

struct MetricsReport {
  double sse_total = 0.0;
  double sse_signal = 0.0;
  double sse_noise = 0.0;
  double hamming_total = 0.0;
  double hamming_signal = 0.0;
  double hamming_noise = 0.0;
  double runtime_seconds = 0.0;
};

namespace detail {

inline std::pair<Eigen::Index, Eigen::Index> rows_of(Subset subset, Eigen::Index p, Eigen::Index signal) {
  switch (subset) {
    case Subset::kSignal: return {0, signal};
    case Subset::kNoise: return {signal, p};
    case Subset::kAll: break;
  }
  return {0, p};
}

inline void require_same_shape(const CoefPath& a, const CoefPath& b) {
  if (a.coefficients.rows() != b.coefficients.rows() || a.coefficients.cols() != b.coefficients.cols())
    throw StructuralError("metrics: estimate and truth shapes differ");
}

}  // namespace detail

/// Σ (β̂_tj − β⁰_tj)² over the rows in `subset` (signal = first `signal_rows`).
inline double sse(const CoefPath& estimate, const CoefPath& truth, Subset subset = Subset::kAll,
                  Eigen::Index signal_rows = 4) {
  detail::require_same_shape(estimate, truth);
  const auto [lo, hi] = detail::rows_of(subset, truth.predictors(), signal_rows);
  if (hi <= lo) return 0.0;
  return (estimate.coefficients.middleRows(lo, hi - lo) - truth.coefficients.middleRows(lo, hi - lo)).squaredNorm();
}

/// Percentage of entries in `subset` whose zero/nonzero status disagrees.
inline double hamming(const CoefPath& estimate, const CoefPath& truth, Subset subset = Subset::kAll,
                      Eigen::Index signal_rows = 4) {
  detail::require_same_shape(estimate, truth);
  const auto [lo, hi] = detail::rows_of(subset, truth.predictors(), signal_rows);
  const Eigen::Index cells = (hi - lo) * truth.horizon();
  if (cells <= 0) return 0.0;
  const auto est = (estimate.coefficients.middleRows(lo, hi - lo).array() != 0.0);
  const auto tru = (truth.coefficients.middleRows(lo, hi - lo).array() != 0.0);
  const auto mismatches = (est != tru).count();
  return 100.0 * static_cast<double>(mismatches) / static_cast<double>(cells);
}

inline MetricsReport evaluate(const CoefPath& estimate, const CoefPath& truth, Eigen::Index signal_rows = 4,
                              double runtime_seconds = 0.0) {
  MetricsReport r;
  r.sse_signal = sse(estimate, truth, Subset::kSignal, signal_rows);
  r.sse_noise = sse(estimate, truth, Subset::kNoise, signal_rows);
  r.sse_total = r.sse_signal + r.sse_noise;
  r.hamming_total = hamming(estimate, truth, Subset::kAll, signal_rows);
  r.hamming_signal = hamming(estimate, truth, Subset::kSignal, signal_rows);
  r.hamming_noise = hamming(estimate, truth, Subset::kNoise, signal_rows);
  r.runtime_seconds = runtime_seconds;
  return r;
}

/// Element k is the mean of the first k+1 squared errors.
inline std::vector<double> msfe_path(const std::vector<double>& errors) {
  if (errors.empty()) throw StructuralError("msfe_path: no forecast errors");
  std::vector<double> out;
  out.reserve(errors.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    acc += errors[k] * errors[k];
    out.push_back(acc / static_cast<double>(k + 1));
  }
  return out;
}

}  // namespace dss::experiments
