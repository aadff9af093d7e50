#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dss/threshold.hpp"

using namespace dss;

namespace {

const DssParams kFig1b = DssParams::from_grid(0.9, 1.0, 10.0, 0.9);
const DssParams kSticky = DssParams::from_grid(0.98, 0.9, 10.0, 0.9);

// Dense scan of the one-site objective; independent of the library maximiser.
double brute_argmax(double z, double x, double prev, double next, const DssParams& p) {
  double best = 0.0, best_v = one_site_objective(0.0, z, x, prev, next, p);
  for (double b = -8; b <= 8; b += 2e-4) {
    const double v = one_site_objective(b, z, x, prev, next, p);
    if (v > best_v) best_v = v, best = b;
  }
  return best;
}

}  // namespace

TEST(Thresholds, SpikeOnlyLimitIsSoftThresholdBand) {
  DssParams p{1e-14, 1.3, 1.0, 0.0, 0.0};
  const ThresholdPair th = selection_thresholds(1.0, 0.4, -0.2, p);
  EXPECT_NEAR(th.upper, 1.3, 1e-6);
  EXPECT_NEAR(th.lower, -1.3, 1e-6);
}

TEST(Thresholds, AsymmetricWhenNeighboursArePositive) {
  const ThresholdPair th = selection_thresholds(1.0, 1.5, 1.5, kFig1b);
  EXPECT_LT(th.lower, th.upper);
  EXPECT_LT(th.upper, std::abs(th.lower));
  // regression baselines
  EXPECT_NEAR(th.lower, -1.25126, 1e-4);
  EXPECT_NEAR(th.upper, -0.92347, 1e-4);
}

TEST(Thresholds, ContinuousInPreviousValue) {
  const ThresholdPair a = selection_thresholds(1.0, 1.5, 1.5, kFig1b);
  const ThresholdPair b = selection_thresholds(1.0, 1.5 + 1e-4, 1.5, kFig1b);
  EXPECT_LT(std::abs(a.lower - b.lower), 1e-2);
  EXPECT_LT(std::abs(a.upper - b.upper), 1e-2);
}

TEST(Thresholds, RejectsZeroDesign) { EXPECT_THROW(selection_thresholds(0.0, 1, 1, kFig1b), StructuralError); }

TEST(OneSiteMap, NoSignalGivesZero) { EXPECT_EQ(one_site_map(0.0, 1.0, 0.0, 0.0, kFig1b), 0.0); }

TEST(OneSiteMap, StrongSignalTracked) {
  const double b = one_site_map(3.0, 1.0, 3.0, 3.0, kSticky);
  EXPECT_NE(b, 0.0);
  EXPECT_NEAR(b, 3.0, 0.2);
  EXPECT_LT(std::abs(fixed_point_residual(b, 3.0, 1.0, 3.0, 3.0, kSticky)), 1e-6);
}

TEST(OneSiteMap, AgreesWithBruteForce) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int k = 0; k < 30; ++k) {
    const double z = u(rng), x = 0.5 + std::abs(u(rng)) / 2, prev = u(rng), next = u(rng);
    const double mine = one_site_map(z, x, prev, next, kFig1b);
    const double brute = brute_argmax(z, x, prev, next, kFig1b);
    const double gap = one_site_objective(mine, z, x, prev, next, kFig1b) -
                       one_site_objective(brute, z, x, prev, next, kFig1b);
    EXPECT_GT(gap, -1e-7) << "z=" << z << " x=" << x;
  }
}

TEST(OneSiteMap, ZeroSetMatchesThresholdBand) {
  for (const auto& [prev, next] : {std::pair{1.5, 1.5}, std::pair{0.0, 0.0}, std::pair{-0.8, 2.0}}) {
    const ThresholdPair th = selection_thresholds(1.0, prev, next, kFig1b);
    for (int i = 0; i < 200; ++i) {
      const double y = -3.0 + 6.0 * i / 199.0;
      const double b = one_site_map(y, 1.0, prev, next, kFig1b);
      EXPECT_EQ(b == 0.0, th.contains(y)) << "y=" << y << " prev=" << prev << " next=" << next;
      EXPECT_LT(std::abs(fixed_point_residual(b, y, 1.0, prev, next, kFig1b)), 1e-6);
    }
  }
}

TEST(OneSiteMap, TerminalUsesProspectiveOnly) {
  const double b = one_site_map_terminal(2.0, 1.0, 1.5, kFig1b);
  const double norm = prospective_pen(0.0, 1.5, kFig1b);
  double best = 0.0, best_v = -0.5 * 4.0;
  for (double v = -6; v <= 6; v += 1e-4) {
    const double f = -0.5 * (2.0 - v) * (2.0 - v) + prospective_pen(v, 1.5, kFig1b) - norm;
    if (f > best_v) best_v = f, best = v;
  }
  EXPECT_NEAR(b, best, 2e-4);
}

TEST(FixedPointResidual, ZeroAtZero) { EXPECT_EQ(fixed_point_residual(0.0, 1.0, 1.0, 0.5, 0.5, kFig1b), 0.0); }
