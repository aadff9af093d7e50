#pragma once

#include <chrono>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "dss/baselines.hpp"
#include "dss/em.hpp"
#include "dss/experiments/metrics.hpp"
#include "dss/experiments/synthetic.hpp"
#include "dss/parallel.hpp"
#include "dss/params.hpp"

namespace dss::experiments {

struct GridConfig {
  std::vector<double> phi1{0.95, 0.98};
  std::vector<double> lambda0{0.7, 0.9};
  /// Stationary slab variances λ1 / (1 − φ1²).
  std::vector<double> stationary_variance{10.0, 25.0};
  std::vector<double> theta{0.9, 0.95, 0.98};
  bool include_dlm = true;
  bool include_lasso = true;
  double dlm_phi1 = 0.98;
  double dlm_stationary_variance = 10.0;
  int replications = 10;
  std::uint64_t seed = 1;
  SyntheticDesign design{};
  FitOptions fit{};
  ExpandingOptions lasso{};
  std::size_t workers = 1;

  /// DSS cells in table order: φ1, then A, then λ0, then Θ.
  [[nodiscard]] std::vector<DssParams> dss_cells() const {
    std::vector<DssParams> cells;
    for (double f : phi1)
      for (double a : stationary_variance)
        for (double l0 : lambda0)
          for (double th : theta) cells.push_back(DssParams::from_grid(f, l0, a, th));
    return cells;
  }
};

struct CellReport {
  std::string method;
  std::string label;
  MetricsReport mean{};
  int completed = 0;
  int failures = 0;
  std::vector<std::string> failure_messages;
};

namespace detail {

struct CellSpec {
  std::string method;
  std::string label;
  DssParams params{};
};

inline std::vector<CellSpec> cell_specs(const GridConfig& cfg) {
  std::vector<CellSpec> specs;
  if (cfg.include_dlm) specs.push_back({"DLM", "", {}});
  if (cfg.include_lasso) specs.push_back({"LASSO", "", {}});
  for (const DssParams& p : cfg.dss_cells()) specs.push_back({"DSS", p.label(), p});
  return specs;
}

}  // namespace detail

/// Replicated synthetic study: the true coefficient path comes from the
/// master seed; each replication draws a fresh design and noise. Metrics are
/// averaged per cell over successful replications.
inline std::vector<CellReport> run_replications(const GridConfig& cfg) {
  if (cfg.replications <= 0) throw ConfigError("run_replications: replications must be positive");
  const std::vector<detail::CellSpec> specs = detail::cell_specs(cfg);
  const CoefPath truth = simulate_coefficients(cfg.design, cfg.seed).first;
  const auto reps = static_cast<std::size_t>(cfg.replications);

  std::vector<Dataset> datasets(reps);
  for (std::size_t r = 0; r < reps; ++r) datasets[r] = simulate_responses(truth, cfg.seed, r + 1);

  struct Outcome {
    bool ok = false;
    MetricsReport metrics{};
    std::string error;
  };
  std::vector<Outcome> outcomes(specs.size() * reps);
  const Eigen::Index signal = cfg.design.signal_series();
  const double dlm_lambda1 = cfg.dlm_stationary_variance * (1.0 - cfg.dlm_phi1 * cfg.dlm_phi1);

  parallel_for(outcomes.size(), cfg.workers, [&](std::size_t k) {
    const detail::CellSpec& spec = specs[k / reps];
    const Dataset& data = datasets[k % reps];
    Outcome& out = outcomes[k];
    const auto start = std::chrono::steady_clock::now();
    try {
      CoefPath estimate;
      if (spec.method == "DLM") {
        estimate = dlm_fit(data, cfg.dlm_phi1, dlm_lambda1);
      } else if (spec.method == "LASSO") {
        estimate = lasso_expanding_path(data, cfg.lasso);
      } else {
        estimate = fit_map(data, spec.params, cfg.fit).path;
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.metrics = evaluate(estimate, truth, signal, secs);
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  std::vector<CellReport> reports;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    CellReport rep;
    rep.method = specs[c].method;
    rep.label = specs[c].label;
    for (std::size_t r = 0; r < reps; ++r) {
      const Outcome& o = outcomes[c * reps + r];
      if (!o.ok) {
        ++rep.failures;
        rep.failure_messages.push_back("replication " + std::to_string(r + 1) + ": " + o.error);
        continue;
      }
      ++rep.completed;
      rep.mean.sse_total += o.metrics.sse_total;
      rep.mean.sse_signal += o.metrics.sse_signal;
      rep.mean.sse_noise += o.metrics.sse_noise;
      rep.mean.hamming_total += o.metrics.hamming_total;
      rep.mean.hamming_signal += o.metrics.hamming_signal;
      rep.mean.hamming_noise += o.metrics.hamming_noise;
      rep.mean.runtime_seconds += o.metrics.runtime_seconds;
    }
    if (rep.completed > 0) {
      const double n = rep.completed;
      rep.mean.sse_total /= n;
      rep.mean.sse_signal /= n;
      rep.mean.sse_noise /= n;
      rep.mean.hamming_total /= n;
      rep.mean.hamming_signal /= n;
      rep.mean.hamming_noise /= n;
      rep.mean.runtime_seconds /= n;
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

/// Table layout: method, setting, runtime, then SSE/Hamming for all, signal,
/// and noise rows. `include_runtime = false` gives byte-stable output.
inline void write_table_csv(std::ostream& os, const std::vector<CellReport>& reports, bool include_runtime = true) {
  os.precision(10);
  os << "method,setting,time_s,sse_all,ham_all,sse_signal,ham_signal,sse_noise,ham_noise,completed,failures\n";
  for (const CellReport& r : reports) {
    os << r.method << ",\"" << r.label << "\",";
    if (include_runtime) os << r.mean.runtime_seconds;
    os << ',' << r.mean.sse_total << ',' << r.mean.hamming_total << ',' << r.mean.sse_signal << ','
       << r.mean.hamming_signal << ',' << r.mean.sse_noise << ',' << r.mean.hamming_noise << ',' << r.completed << ','
       << r.failures << '\n';
  }
}

}  // namespace dss::experiments
