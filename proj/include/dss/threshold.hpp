#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "dss/densities.hpp"
#include "dss/error.hpp"
#include "dss/params.hpp"
#include "dss/penalty.hpp"

namespace dss {

/// Asymmetric selection thresholds; the one-site mode is zero iff
/// lower < x·z < upper.
struct ThresholdPair {
  double lower = 0.0;
  double upper = 0.0;

  [[nodiscard]] bool contains(double v) const { return lower < v && v < upper; }
};

/// Settings of the grid-plus-golden-section maximiser.
struct GridSearchOptions {
  std::size_t grid_points = 4001;
  std::size_t refine_brackets = 3;
  double width_tol = 1e-10;
  /// Objective ties within this margin resolve to zero.
  double zero_tie = 1e-12;
};

namespace detail {

struct Argmax {
  double x = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

inline Argmax golden_section_max(const std::function<double(double)>& f, double a, double b, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  Argmax best{c, fc};
  if (fd > best.value) best = {d, fd};
  return best;
}

/// Maximises f on [lo, hi]: evaluates a uniform grid, then refines the best
/// few local maxima of the grid by golden section.
inline Argmax grid_maximize(const std::function<double(double)>& f, double lo, double hi,
                            const GridSearchOptions& opt) {
  const std::size_t n = std::max<std::size_t>(opt.grid_points, 3);
  std::vector<double> xs(n), fs(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = (i + 1 == n) ? hi : lo + step * static_cast<double>(i);
    fs[i] = f(xs[i]);
  }

  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || fs[i] >= fs[i - 1];
    const bool right_ok = i + 1 == n || fs[i] >= fs[i + 1];
    if (left_ok && right_ok) peaks.push_back(i);
  }
  std::sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return fs[a] > fs[b]; });
  if (peaks.size() > opt.refine_brackets) peaks.resize(opt.refine_brackets);

  Argmax best;
  for (std::size_t i = 0; i < n; ++i)
    if (fs[i] > best.value) best = {xs[i], fs[i]};
  for (std::size_t i : peaks) {
    const double a = i == 0 ? xs[0] : xs[i - 1];
    const double b = i + 1 == n ? xs[n - 1] : xs[i + 1];
    const Argmax local = golden_section_max(f, a, b, opt.width_tol);
    if (local.value > best.value) best = local;
  }
  return best;
}

inline double search_radius(double z_over_x, double beta_prev, double beta_next, const DssParams& params) {
  return std::abs(params.phi0) + 6.0 * std::sqrt(params.stationary_variance()) + std::abs(z_over_x) +
         std::abs(beta_prev) + std::abs(beta_next);
}

// Values of β closer to zero than this are excluded from the threshold grids,
// where g(β) is evaluated as a difference quotient.
inline constexpr double kThresholdGap = 1e-8;

}  // namespace detail

/// Selection thresholds for design value x given the neighbouring coefficients.
///
/// With g(β) = βx²/2 − Pen(β)/β (Pen the normed log prior), the upper threshold
/// is inf over β > 0 of g and the lower threshold is sup over β < 0 of g.
/// The limits g(0±) = ±Λ*(0±) are included as candidates.
inline ThresholdPair selection_thresholds(double x, double beta_prev, double beta_next, const DssParams& params,
                                          const GridSearchOptions& opt = {}) {
  params.validate();
  if (x == 0.0 || !std::isfinite(x)) throw StructuralError("selection_thresholds: x must be nonzero and finite");

  auto g = [&](double beta) { return beta * x * x / 2.0 - total_pen(beta, beta_prev, beta_next, params) / beta; };
  const double radius = detail::search_radius(0.0, beta_prev, beta_next, params) + 4.0 / (x * x);
  constexpr double kTiny = 1e-300;

  const detail::Argmax upper =
      detail::grid_maximize([&](double b) { return -g(b); }, detail::kThresholdGap, radius, opt);
  const detail::Argmax lower = detail::grid_maximize(g, -radius, -detail::kThresholdGap, opt);

  ThresholdPair out;
  out.upper = std::min(-upper.value, total_shrinkage(kTiny, beta_prev, beta_next, params).total);
  out.lower = std::max(lower.value, -total_shrinkage(-kTiny, beta_prev, beta_next, params).total);
  return out;
}

/// Objective of the one-site problem: −(z − xβ)²/2 + Pen(β | β_{t−1}, β_{t+1}).
inline double one_site_objective(double beta, double z, double x, double beta_prev, double beta_next,
                                 const DssParams& params) {
  const double r = z - x * beta;
  return -0.5 * r * r + total_pen(beta, beta_prev, beta_next, params);
}

/// Global maximiser of the one-site objective by grid scan plus golden-section
/// refinement. Zero wins ties within `opt.zero_tie`.
inline double one_site_map(double z, double x, double beta_prev, double beta_next, const DssParams& params,
                           const GridSearchOptions& opt = {}) {
  params.validate();
  if (x == 0.0 || !std::isfinite(x)) throw StructuralError("one_site_map: x must be nonzero and finite");
  auto f = [&](double beta) { return one_site_objective(beta, z, x, beta_prev, beta_next, params); };
  const double radius = detail::search_radius(z / x, beta_prev, beta_next, params);

  const detail::Argmax best = detail::grid_maximize(f, -radius, radius, opt);
  const double at_zero = f(0.0);
  if (best.x == 0.0 || at_zero >= best.value - opt.zero_tie) return 0.0;
  return best.x;
}

/// One-site maximiser at the last time point, where only the prospective
/// penalty pen(β | β_{T−1}) − pen(0 | β_{T−1}) applies.
inline double one_site_map_terminal(double z, double x, double beta_prev, const DssParams& params,
                                    const GridSearchOptions& opt = {}) {
  params.validate();
  if (x == 0.0 || !std::isfinite(x)) throw StructuralError("one_site_map_terminal: x must be nonzero and finite");
  const double norm = prospective_pen(0.0, beta_prev, params);
  auto f = [&](double beta) {
    const double r = z - x * beta;
    return -0.5 * r * r + prospective_pen(beta, beta_prev, params) - norm;
  };
  const double radius = detail::search_radius(z / x, beta_prev, 0.0, params);
  const detail::Argmax best = detail::grid_maximize(f, -radius, radius, opt);
  if (best.x == 0.0 || f(0.0) >= best.value - opt.zero_tie) return 0.0;
  return best.x;
}

/// β̂ − (Z − Λ*(β̂) sign(β̂))/x² with Z = x·z: the first-order condition at a
/// nonzero one-site mode. Zero at β̂ = 0 by convention.
inline double fixed_point_residual(double beta_hat, double z, double x, double beta_prev, double beta_next,
                                   const DssParams& params) {
  if (beta_hat == 0.0) return 0.0;
  const double big_z = x * z;
  const double shrink = total_shrinkage(beta_hat, beta_prev, beta_next, params).total;
  return beta_hat - (big_z - shrink * detail::sign(beta_hat)) / (x * x);
}

}  // namespace dss
