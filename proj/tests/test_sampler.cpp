#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "dss/sampler.hpp"

using namespace dss;

namespace {

double ks_distance(std::vector<double> xs, const DssParams& p) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = stationary_mixture_cdf(xs[i], p);
    d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  return d;
}

const DssParams kFig{0.9, 1.0, 1.9, 0.0, 0.9};

}  // namespace

TEST(Sampler, DeterministicPerSeed) {
  const DssPath a = sample_dss_path(kFig, 500, 42);
  const DssPath b = sample_dss_path(kFig, 500, 42);
  const DssPath c = sample_dss_path(kFig, 500, 43);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.regimes, b.regimes);
  EXPECT_NE(a.values, c.values);
}

TEST(Sampler, Shapes) {
  const DssPath a = sample_dss_path(kFig, 17, 1);
  EXPECT_EQ(a.values.size(), 18u);
  EXPECT_EQ(a.regimes.size(), 17u);
  EXPECT_EQ(a.weights.size(), 17u);
  for (std::size_t t = 0; t < 17; ++t) EXPECT_DOUBLE_EQ(a.weights[t], transition_theta(a.values[t], kFig));
}

TEST(Sampler, RejectsEmptyHorizonAndBadParams) {
  EXPECT_THROW(sample_dss_path(kFig, 0, 1), ConfigError);
  EXPECT_THROW(sample_dss_path(DssParams{0.5, 1, 1, 0, 1.2}, 10, 1), DomainError);
}

TEST(Sampler, SlabLimitIsGaussianAr1) {
  DssParams p = kFig;
  p.theta_marginal = 1 - 1e-12;
  const DssPath path = sample_dss_path(p, 20000, 5);
  EXPECT_TRUE(std::all_of(path.regimes.begin(), path.regimes.end(), [](int g) { return g == 1; }));
  // lag-one regression of the innovations
  double num = 0, den = 0, ss = 0;
  for (std::size_t t = 1; t < path.values.size(); ++t) {
    num += path.values[t] * path.values[t - 1];
    den += path.values[t - 1] * path.values[t - 1];
  }
  const double phi_hat = num / den;
  for (std::size_t t = 1; t < path.values.size(); ++t) {
    const double e = path.values[t] - phi_hat * path.values[t - 1];
    ss += e * e;
  }
  EXPECT_NEAR(phi_hat, 0.9, 0.01);
  EXPECT_NEAR(ss / 20000.0, 1.9, 0.06);
}

TEST(Sampler, SpikeLimitIsIidLaplace) {
  DssParams p = kFig;
  p.theta_marginal = 1e-12;
  p.lambda0 = 2.0;
  const DssPath path = sample_dss_path(p, 40000, 9);
  EXPECT_TRUE(std::all_of(path.regimes.begin(), path.regimes.end(), [](int g) { return g == 0; }));
  double mean_abs = 0, lag = 0, var = 0;
  for (std::size_t t = 1; t < path.values.size(); ++t) {
    mean_abs += std::abs(path.values[t]);
    var += path.values[t] * path.values[t];
    lag += path.values[t] * path.values[t - 1];
  }
  EXPECT_NEAR(mean_abs / 40000.0, 0.5, 0.01);
  EXPECT_NEAR(lag / var, 0.0, 0.02);
}

// Independent chains started from the stationary law stay there after a few
// transitions, so their endpoints are iid draws from the mixture.
TEST(Sampler, StationaryAcrossIndependentChains) {
  std::vector<double> ends;
  for (std::uint64_t s = 0; s < 40000; ++s) ends.push_back(sample_dss_path(kFig, 5, 1000 + s).values.back());
  EXPECT_LT(ks_distance(ends, kFig), 0.012);
}

TEST(Sampler, StationaryAlongLongPath) {
  const DssPath path = sample_dss_path(kFig, 200000, 2024);
  const std::vector<double> v(path.values.begin() + 1, path.values.end());
  EXPECT_LT(ks_distance(v, kFig), 0.01);
}

TEST(Sampler, CsvLayout) {
  const DssPath path = sample_dss_path(kFig, 3, 1);
  std::ostringstream os;
  write_path_csv(os, path);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,beta,gamma,theta");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("0,", 0), 0u);
  EXPECT_EQ(line.substr(line.size() - 2), ",,");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}
