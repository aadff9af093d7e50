#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "dss/experiments/forecast.hpp"
#include "dss/experiments/metrics.hpp"
#include "dss/experiments/replications.hpp"
#include "dss/experiments/synthetic.hpp"

using namespace dss;
using namespace dss::experiments;

TEST(Synthetic, MaskStructure) {
  const SyntheticTruth truth = simulate_synthetic(50, 100, 3);
  EXPECT_EQ(truth.active_mask.rows(), 50);
  EXPECT_EQ(truth.active_mask.cols(), 100);
  EXPECT_EQ(truth.active_mask.row(0).minCoeff(), 1);
  EXPECT_EQ(truth.active_mask.bottomRows(46).maxCoeff(), 0);
  EXPECT_GT(truth.true_path.coefficients.row(0).cwiseAbs().minCoeff(), 0.5);
  EXPECT_GE(truth.rejection_attempts, 1);
  for (Eigen::Index j = 0; j < 50; ++j)
    for (Eigen::Index t = 0; t < 100; ++t)
      EXPECT_EQ(truth.active_mask(j, t), truth.true_path.coefficients(j, t) != 0.0 ? 1 : 0);
}

TEST(Synthetic, IntermittentSeriesHaveZeroAndNonzeroStretches) {
  double total = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SyntheticTruth truth = simulate_synthetic(50, 100, seed);
    total += 1.0 - truth.active_mask.middleRows(1, 3).cast<double>().mean();
  }
  const double avg = total / 10;
  EXPECT_GT(avg, 0.0);
  EXPECT_LT(avg, 1.0);
}

TEST(Synthetic, ResponsesFollowModel) {
  const SyntheticTruth truth = simulate_synthetic(8, 30, 4);
  const Dataset& d = truth.dataset;
  const Eigen::VectorXd fitted = (d.design.array() * truth.true_path.coefficients.transpose().array()).rowwise().sum();
  const Eigen::VectorXd noise = d.responses - fitted;
  EXPECT_LT(std::abs(noise.mean()), 0.6);
  EXPECT_GT(noise.squaredNorm() / 30, 0.4);
  EXPECT_LT(noise.squaredNorm() / 30, 2.0);
}

TEST(Synthetic, DeterministicAndSizeChecked) {
  const SyntheticTruth a = simulate_synthetic(10, 20, 9);
  const SyntheticTruth b = simulate_synthetic(10, 20, 9);
  EXPECT_EQ(a.dataset.responses, b.dataset.responses);
  EXPECT_EQ(a.true_path.stacked(), b.true_path.stacked());
  EXPECT_THROW(simulate_synthetic(4, 20, 1), ConfigError);
  EXPECT_THROW(simulate_synthetic(10, 1, 1), ConfigError);
}

TEST(Metrics, SseIdentities) {
  const SyntheticTruth truth = simulate_synthetic(6, 10, 2);
  const CoefPath& b = truth.true_path;
  EXPECT_EQ(sse(b, b), 0.0);
  CoefPath zero = CoefPath::zeros(6, 10), one = zero;
  one.coefficients(3, 4) = 2.0;
  EXPECT_EQ(sse(one, zero), 4.0);
  CoefPath est = b;
  est.coefficients.array() += 0.3;
  EXPECT_NEAR(sse(est, b, Subset::kSignal) + sse(est, b, Subset::kNoise), sse(est, b), 1e-9);
  const MetricsReport r = evaluate(est, b);
  EXPECT_NEAR(r.sse_total, r.sse_signal + r.sse_noise, 1e-9);
  EXPECT_THROW(sse(CoefPath::zeros(5, 10), b), StructuralError);
}

TEST(Metrics, HammingIdentities) {
  const SyntheticTruth truth = simulate_synthetic(6, 10, 2);
  const CoefPath& b = truth.true_path;
  EXPECT_EQ(hamming(b, b), 0.0);
  CoefPath dense = CoefPath::zeros(6, 10);
  dense.coefficients.setConstant(0.1);
  EXPECT_EQ(hamming(dense, CoefPath::zeros(6, 10)), 100.0);
  EXPECT_EQ(hamming(dense, b, Subset::kNoise), 100.0);
  EXPECT_EQ(hamming(CoefPath::zeros(6, 10), dense, Subset::kSignal), 100.0);
  const MetricsReport r = evaluate(dense, b);
  for (double v : {r.hamming_total, r.hamming_signal, r.hamming_noise}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 100.0);
  }
}

TEST(Msfe, Identities) {
  const auto c = msfe_path({2.0, -2.0, 2.0});
  for (double v : c) EXPECT_DOUBLE_EQ(v, 4.0);
  const auto p = msfe_path({1.0, 0.0});
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  const auto a = msfe_path({0.3, -1.2, 2.0, 0.1});
  const auto b = msfe_path({2.0, 0.1, 0.3, -1.2});
  EXPECT_NE(a, b);
  EXPECT_NEAR(a.back(), b.back(), 1e-15);
  EXPECT_THROW(msfe_path({}), StructuralError);
}

TEST(ForecastOneStep, Arithmetic) {
  const DssParams p = DssParams::from_grid(0.98, 0.9, 10, 0.9);
  const CoefPath zero = CoefPath::zeros(3, 5);
  EXPECT_EQ(forecast_one_step(zero, Eigen::Vector3d(1, 2, 3), p), 0.0);

  DssParams slab = p;
  slab.theta_marginal = 1 - 1e-15;
  CoefPath one = zero;
  one.coefficients(0, 4) = 1.0;
  EXPECT_NEAR(forecast_one_step(one, Eigen::Vector3d(1, 0, 0), slab), 0.98, 1e-12);
  EXPECT_EQ(forecast_one_step(one, Eigen::Vector3d(2, 0, 0), p, Propagation::kPlugIn), 2.0);
  EXPECT_THROW(forecast_one_step(one, Eigen::Vector2d(1, 0), p), StructuralError);
}

TEST(ForecastOneStep, MatchesMonteCarloOfTransition) {
  const DssParams p = DssParams::from_grid(0.9, 1.0, 10, 0.9);
  CoefPath path = CoefPath::zeros(3, 2);
  path.coefficients.col(1) << 1.5, -0.4, 3.0;
  const Eigen::Vector3d x(0.7, -1.1, 0.5);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0, 1);
  std::exponential_distribution<double> ex(p.lambda0);
  std::normal_distribution<double> n(0, std::sqrt(p.lambda1));
  const int draws = 1000000;
  double sum = 0, sum2 = 0;
  for (int k = 0; k < draws; ++k) {
    double y = 0;
    for (int j = 0; j < 3; ++j) {
      const double prev = path.coefficients(j, 1);
      const double next = u(rng) < transition_theta(prev, p) ? p.phi1 * prev + n(rng) : (u(rng) < 0.5 ? 1 : -1) * ex(rng);
      y += x(j) * next;
    }
    sum += y;
    sum2 += y * y;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
  EXPECT_LT(std::abs(forecast_one_step(path, x, p) - mean), 3 * se);
}

namespace {

class Oracle final : public ForecastMethod {
 public:
  explicit Oracle(const Dataset& full) : full_(full) {}
  [[nodiscard]] std::string name() const override { return "oracle"; }
  double forecast(const Dataset& train, const Eigen::VectorXd&) override { return full_.responses(train.horizon()); }

 private:
  const Dataset& full_;
};

// Fails the test if it ever sees rows beyond the window it is asked about.
class CausalProbe final : public ForecastMethod {
 public:
  CausalProbe(const Dataset& full, Eigen::Index split) : full_(full), expected_(split) {}
  [[nodiscard]] std::string name() const override { return "probe"; }
  double forecast(const Dataset& train, const Eigen::VectorXd& x_next) override {
    EXPECT_EQ(train.horizon(), expected_);
    EXPECT_EQ(train.responses, full_.responses.head(expected_));
    EXPECT_EQ(x_next, full_.design.row(expected_).transpose());
    ++expected_;
    if (expected_ == 25) throw NumericalError("planned failure");
    return 0.0;
  }

 private:
  const Dataset& full_;
  Eigen::Index expected_;
};

}  // namespace

TEST(ForecastHarness, PerfectForesightHasZeroMsfe) {
  const SyntheticTruth truth = simulate_synthetic(6, 40, 5);
  const auto report = run_forecast_experiment(truth.dataset, 20, {std::make_shared<Oracle>(truth.dataset)});
  ASSERT_EQ(report.methods.size(), 1u);
  for (double v : report.methods[0].msfe) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(report.methods[0].msfe.size(), 20u);
  EXPECT_FALSE(report.partial());
}

TEST(ForecastHarness, CausalAndRecordsFailures) {
  const SyntheticTruth truth = simulate_synthetic(6, 40, 6);
  const auto report = run_forecast_experiment(truth.dataset, 20, {std::make_shared<CausalProbe>(truth.dataset, 20)});
  const MethodForecasts& m = report.methods[0];
  EXPECT_EQ(m.failures, 1u);
  EXPECT_TRUE(report.partial());
  EXPECT_TRUE(std::isnan(m.errors[4]));
  EXPECT_EQ(m.msfe.size(), 19u);
  EXPECT_THROW(run_forecast_experiment(truth.dataset, 40, {std::make_shared<Oracle>(truth.dataset)}), ConfigError);
}

TEST(ForecastHarness, DssBeatsDlmOnSyntheticPanel) {
  SyntheticDesign design;
  design.predictors = 20;
  design.horizon = 120;
  const SyntheticTruth truth = simulate_synthetic(design, 1);
  const DssParams p = DssParams::from_grid(0.98, 0.9, 10, 0.9);
  const auto report = run_forecast_experiment(
      truth.dataset, 60,
      {std::make_shared<DssForecaster>(p), std::make_shared<DlmForecaster>(p.phi1, p.lambda1)});
  EXPECT_LT(report.methods[0].final_msfe, report.methods[1].final_msfe);
}

TEST(WarmStart, MatchesColdStart) {
  SyntheticDesign design;
  design.predictors = 8;
  design.horizon = 50;
  const SyntheticTruth truth = simulate_synthetic(design, 2);
  const DssParams p = DssParams::from_grid(0.98, 0.9, 10, 0.9);
  FitOptions o;
  o.max_iters = 20000;
  o.tol = 1e-9;
  auto cold = std::make_shared<DssForecaster>(p, o, false);
  auto warm = std::make_shared<DssForecaster>(p, o, true);
  const auto rc = run_forecast_experiment(truth.dataset, 30, {cold});
  const auto rw = run_forecast_experiment(truth.dataset, 30, {warm});
  EXPECT_LT(rw.methods[0].runtime_seconds, rc.methods[0].runtime_seconds);
  EXPECT_NEAR(rw.methods[0].final_msfe, rc.methods[0].final_msfe, 1e-6);
}

TEST(Replications, GridMatchesTableLayout) {
  const GridConfig cfg;
  const auto cells = cfg.dss_cells();
  ASSERT_EQ(cells.size(), 24u);
  EXPECT_EQ(cells.front().label(), "{0.95, 0.7, 10, 0.9}");
  EXPECT_EQ(cells[3].label(), "{0.95, 0.9, 10, 0.9}");
  EXPECT_EQ(cells[6].label(), "{0.95, 0.7, 25, 0.9}");
  EXPECT_EQ(cells.back().label(), "{0.98, 0.9, 25, 0.98}");
}

TEST(Replications, SmallRunIsReproducible) {
  GridConfig cfg;
  cfg.design.predictors = 8;
  cfg.design.horizon = 30;
  cfg.replications = 2;
  cfg.phi1 = {0.98};
  cfg.lambda0 = {0.9};
  cfg.stationary_variance = {10};
  cfg.theta = {0.9, 0.95};
  cfg.lasso.t_min = 15;
  const auto a = run_replications(cfg);
  cfg.workers = 3;
  const auto b = run_replications(cfg);
  ASSERT_EQ(a.size(), 4u);
  std::ostringstream sa, sb;
  write_table_csv(sa, a, false);
  write_table_csv(sb, b, false);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a[0].method, "DLM");
  EXPECT_EQ(a[0].mean.hamming_noise, 100.0);
  EXPECT_EQ(a[1].method, "LASSO");
  for (const auto& r : a) EXPECT_EQ(r.completed, 2);
}

TEST(Replications, FailuresAreRecordedPerCell) {
  GridConfig cfg;
  cfg.design.predictors = 6;
  cfg.design.horizon = 12;
  cfg.replications = 2;
  cfg.phi1 = {0.98};
  cfg.lambda0 = {0.9};
  cfg.stationary_variance = {10};
  cfg.theta = {0.9};
  cfg.include_dlm = false;
  cfg.lasso.t_min = 20;  // longer than the series
  const auto reps = run_replications(cfg);
  ASSERT_EQ(reps.size(), 2u);
  EXPECT_EQ(reps[0].failures, 2);
  EXPECT_EQ(reps[0].completed, 0);
  EXPECT_EQ(reps[1].failures, 0);
}
