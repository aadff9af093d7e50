#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "dss/dss.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kConfigExit = 2, kDataExit = 3, kNumericalExit = 4, kPartialExit = 5 };

struct ParamFlags {
  double phi1 = 0.98;
  double lambda0 = 0.9;
  double stat_var = 10.0;
  double theta = 0.9;

  void attach(CLI::App* app) {
    app->add_option("--phi1", phi1, "slab autoregression")->capture_default_str();
    app->add_option("--lambda0", lambda0, "spike rate")->capture_default_str();
    app->add_option("--stat-var", stat_var, "stationary slab variance lambda1/(1-phi1^2)")->capture_default_str();
    app->add_option("--theta", theta, "marginal slab weight")->capture_default_str();
  }
  [[nodiscard]] dss::DssParams params() const { return dss::DssParams::from_grid(phi1, lambda0, stat_var, theta); }
};

class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw dss::ConfigError("cannot create output directory '" + dir_.string() + "'");
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const fs::path target = dir_ / name;
    std::ofstream os(target, std::ios::binary | std::ios::trunc);
    if (!os) throw dss::ConfigError("cannot write '" + target.string() + "'");
    body(os);
    os.flush();
    if (!os) throw dss::ConfigError("write failed for '" + target.string() + "'");
    files_.push_back(name);
  }

  /// Resolved flags as TOML plus run status; rerunning with `--config` on the
  /// embedded text reproduces the outputs.
  void manifest(const CLI::App& app, const std::string& command, const std::string& status, json extra = json::object()) {
    json m = std::move(extra);
    m["command"] = command;
    m["status"] = status;
    // only the invoked subcommand, as a TOML section
    const CLI::App* sub = app.get_subcommand(command);
    m["config_toml"] = "[" + command + "]\n" + sub->config_to_str(true, false);
    std::vector<std::string> outputs = files_;
    outputs.push_back("manifest.json");
    m["outputs"] = outputs;
    write("manifest.json", [&](std::ostream& os) { os << m.dump(2) << '\n'; });
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

dss::Dataset load_dataset(const std::string& path) {
  dss::experiments::PanelOptions opt;
  opt.target = "y";
  opt.has_date_column = true;
  return dss::experiments::load_panel_csv(path, opt).data;
}

std::vector<double> with_default(std::vector<double> v, std::vector<double> fallback) {
  return v.empty() ? fallback : v;
}

// ---------------------------------------------------------------------------

struct SimulateCmd {
  long p = 50;
  long horizon = 100;
  std::uint64_t seed = 1;
  long intermittent = 3;
  std::string out;

  void attach(CLI::App* app) {
    app->add_option("--p", p, "predictors")->capture_default_str();
    app->add_option("--T", horizon, "time points")->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
    app->add_option("--intermittent", intermittent, "thresholded signal series")->capture_default_str();
    app->add_option("--out", out, "output directory")->required();
  }

  int run(const CLI::App& root) const {
    if (p < 5) throw dss::ConfigError("--p must be at least 5");
    dss::experiments::SyntheticDesign design;
    design.predictors = p;
    design.horizon = horizon;
    design.intermittent_series = intermittent;
    const auto truth = dss::experiments::simulate_synthetic(design, seed);
    OutputDir dir(out);
    dir.write("dataset.csv", [&](std::ostream& os) { dss::io::write_dataset_csv(os, truth.dataset); });
    dir.write("true_path.csv", [&](std::ostream& os) {
      dss::io::write_coefficients_csv(os, truth.true_path, truth.dataset.column_names);
    });
    dir.write("mask.csv", [&](std::ostream& os) {
      dss::io::write_mask_csv(os, truth.active_mask, truth.dataset.column_names);
    });
    dir.manifest(root, "simulate", "ok", {{"rejection_attempts", truth.rejection_attempts}});
    std::cout << "simulated p=" << p << " T=" << horizon << " into " << out << '\n';
    return kOk;
  }
};

struct FitCmd {
  std::string data;
  std::string method = "dss";
  ParamFlags params{0.98, 0.9, 25.0, 0.98};
  int max_iters = 5000;
  double tol = 1e-6;
  std::string initial_rule = "exact";
  int folds = 10;
  std::uint64_t cv_seed = 2024;
  long t_min = 20;
  std::string out;

  void attach(CLI::App* app) {
    app->add_option("--data", data, "dataset CSV (t,y,x1..)")->required();
    app->add_option("--method", method)->check(CLI::IsMember({"dss", "dlm", "lasso"}))->capture_default_str();
    params.attach(app);
    app->add_option("--max-iters", max_iters)->capture_default_str();
    app->add_option("--tol", tol)->capture_default_str();
    app->add_option("--initial-rule", initial_rule)->check(CLI::IsMember({"exact", "printed"}))->capture_default_str();
    app->add_option("--folds", folds, "lasso CV folds")->capture_default_str();
    app->add_option("--cv-seed", cv_seed)->capture_default_str();
    app->add_option("--t-min", t_min, "first lasso window")->capture_default_str();
    app->add_option("--out", out, "output directory")->required();
  }

  int run(const CLI::App& root) const {
    const dss::Dataset ds = load_dataset(data);
    OutputDir dir(out);
    const auto names = ds.column_names;

    if (method == "dss") {
      dss::FitOptions opt;
      opt.max_iters = max_iters;
      opt.tol = tol;
      opt.initial_rule = initial_rule == "exact" ? dss::InitialUpdateRule::kExact : dss::InitialUpdateRule::kAsPrinted;
      dss::FitResult fit;
      try {
        fit = dss::fit_map(ds, params.params(), opt);
      } catch (const dss::NumericalError& e) {
        dir.manifest(root, "fit", "failed", {{"error", e.what()}});
        throw;
      }
      dir.write("coefficients.csv", [&](std::ostream& os) { dss::io::write_coefficients_csv(os, fit.path, names); });
      dir.write("weights.csv", [&](std::ostream& os) { dss::io::write_weights_csv(os, fit.weights, names); });
      dir.write("fit.json", [&](std::ostream& os) { os << dss::io::to_json(fit).dump(2) << '\n'; });
      dir.manifest(root, "fit", fit.converged ? "ok" : "max_iters");
      std::cout << "final objective " << fit.objective_trace.back() << " after " << fit.iterations << " iterations"
                << (fit.converged ? "" : " (not converged)") << '\n';
      return kOk;
    }

    dss::CoefPath path;
    json summary;
    if (method == "dlm") {
      const dss::DssParams p = params.params();
      path = dss::dlm_fit(ds, p.phi1, p.lambda1);
      summary = {{"method", "dlm"}, {"phi1", p.phi1}, {"lambda1", p.lambda1},
                 {"normal_residual", dss::dlm_normal_residual(ds, p.phi1, p.lambda1, path)}};
    } else {
      dss::ExpandingOptions eo;
      eo.cv.folds = folds;
      eo.cv.seed = cv_seed;
      eo.t_min = t_min;
      path = dss::lasso_expanding_path(ds, eo);
      summary = {{"method", "lasso"}, {"folds", folds}, {"t_min", t_min}};
    }
    dir.write("coefficients.csv", [&](std::ostream& os) { dss::io::write_coefficients_csv(os, path, names); });
    dir.write("fit.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
    dir.manifest(root, "fit", "ok");
    std::cout << method << " fit written to " << out << '\n';
    return kOk;
  }
};

struct GridCmd {
  long p = 50;
  long horizon = 100;
  int reps = 10;
  std::uint64_t seed = 1;
  std::vector<double> phi1, lambda0, stat_var, theta;
  bool no_dlm = false;
  bool no_lasso = false;
  int max_iters = 500;
  std::size_t workers = dss::default_workers();
  bool runtime_column = true;
  std::string out;

  void attach(CLI::App* app) {
    app->add_option("--p", p)->capture_default_str();
    app->add_option("--T", horizon)->capture_default_str();
    app->add_option("--reps", reps)->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
    app->add_option("--phi1", phi1, "grid values (default 0.95 0.98)");
    app->add_option("--lambda0", lambda0, "grid values (default 0.7 0.9)");
    app->add_option("--stat-var", stat_var, "grid values (default 10 25)");
    app->add_option("--theta", theta, "grid values (default 0.9 0.95 0.98)");
    app->add_flag("--no-dlm", no_dlm);
    app->add_flag("--no-lasso", no_lasso);
    app->add_option("--max-iters", max_iters, "EM iteration budget per fit")->capture_default_str();
    app->add_option("--workers", workers)->capture_default_str();
    app->add_flag("!--no-runtime", runtime_column, "omit timings for byte-stable tables");
    app->add_option("--out", out)->required();
  }

  int run(const CLI::App& root) const {
    dss::experiments::GridConfig cfg;
    cfg.design.predictors = p;
    cfg.design.horizon = horizon;
    cfg.replications = reps;
    cfg.seed = seed;
    cfg.phi1 = with_default(phi1, cfg.phi1);
    cfg.lambda0 = with_default(lambda0, cfg.lambda0);
    cfg.stationary_variance = with_default(stat_var, cfg.stationary_variance);
    cfg.theta = with_default(theta, cfg.theta);
    cfg.include_dlm = !no_dlm;
    cfg.include_lasso = !no_lasso;
    cfg.fit.max_iters = max_iters;
    cfg.workers = workers;
    cfg.lasso.workers = 1;

    const auto reports = dss::experiments::run_replications(cfg);
    OutputDir dir(out);
    dir.write("table.csv", [&](std::ostream& os) { dss::experiments::write_table_csv(os, reports, runtime_column); });

    int failed_cells = 0, partial_cells = 0;
    json failures = json::array();
    for (const auto& r : reports) {
      if (r.completed == 0) ++failed_cells;
      else if (r.failures > 0) ++partial_cells;
      for (const auto& msg : r.failure_messages) failures.push_back({{"cell", r.method + " " + r.label}, {"error", msg}});
    }
    const bool all_failed = failed_cells == static_cast<int>(reports.size());
    const std::string status = all_failed ? "failed" : (failed_cells + partial_cells > 0 ? "partial" : "ok");
    dir.manifest(root, "grid", status, {{"cells", reports.size()}, {"failures", failures}});
    std::cout << reports.size() << " cells written to " << out << " (" << status << ")\n";
    if (all_failed) return kNumericalExit;
    return status == "partial" ? kPartialExit : kOk;
  }
};

struct ForecastCmd {
  std::string data;
  long p = 20;
  long horizon = 120;
  std::uint64_t seed = 1;
  long split = 0;
  std::vector<std::string> methods{"dss", "dlm", "lasso"};
  ParamFlags params;
  int max_iters = 500;
  bool warm_start = false;
  std::string propagation = "mean";
  std::size_t workers = dss::default_workers();
  std::string out;

  void attach(CLI::App* app) {
    app->add_option("--data", data, "dataset CSV; a synthetic panel is simulated when omitted");
    app->add_option("--p", p, "synthetic predictors")->capture_default_str();
    app->add_option("--T", horizon, "synthetic time points")->capture_default_str();
    app->add_option("--seed", seed, "synthetic seed")->capture_default_str();
    app->add_option("--split", split, "first training window length (default T/2)");
    app->add_option("--methods", methods)->check(CLI::IsMember({"dss", "dlm", "lasso"}))->capture_default_str();
    params.attach(app);
    app->add_option("--max-iters", max_iters)->capture_default_str();
    app->add_flag("--warm-start", warm_start, "start each refit from the previous window's fit");
    app->add_option("--propagation", propagation)->check(CLI::IsMember({"mean", "plugin"}))->capture_default_str();
    app->add_option("--workers", workers)->capture_default_str();
    app->add_option("--out", out)->required();
  }

  int run(const CLI::App& root) const {
    dss::Dataset ds;
    if (!data.empty()) {
      ds = load_dataset(data);
    } else {
      dss::experiments::SyntheticDesign design;
      design.predictors = p;
      design.horizon = horizon;
      ds = dss::experiments::simulate_synthetic(design, seed).dataset;
    }
    const dss::DssParams prm = params.params();
    std::vector<std::shared_ptr<dss::experiments::ForecastMethod>> list;
    for (const auto& m : methods) {
      if (m == "dss") {
        dss::FitOptions opt;
        opt.max_iters = max_iters;
        const auto rule = propagation == "mean" ? dss::experiments::Propagation::kConditionalMean
                                                : dss::experiments::Propagation::kPlugIn;
        list.push_back(std::make_shared<dss::experiments::DssForecaster>(prm, opt, warm_start, rule));
      } else if (m == "dlm") {
        list.push_back(std::make_shared<dss::experiments::DlmForecaster>(prm.phi1, prm.lambda1));
      } else {
        list.push_back(std::make_shared<dss::experiments::LassoForecaster>());
      }
    }
    const long first = split > 0 ? split : static_cast<long>(ds.horizon() / 2);
    const auto report = dss::experiments::run_forecast_experiment(ds, first, list, workers);

    OutputDir dir(out);
    json finals = json::object();
    for (const auto& m : report.methods) {
      dir.write("msfe_" + m.method + ".csv", [&](std::ostream& os) {
        os.precision(17);
        os << "t,error,msfe\n";
        std::size_t k = 0;
        for (std::size_t i = 0; i < m.errors.size(); ++i) {
          os << first + static_cast<long>(i) + 1 << ',' << m.errors[i] << ',';
          if (std::isfinite(m.errors[i]) && k < m.msfe.size()) os << m.msfe[k++];
          os << '\n';
        }
      });
      finals[m.method] = {{"final_msfe", m.final_msfe}, {"failures", m.failures}, {"messages", m.failure_messages}};
      std::cout << m.method << " final MSFE " << m.final_msfe << '\n';
    }
    dir.manifest(root, "forecast", report.partial() ? "partial" : "ok", {{"split", first}, {"methods", finals}});
    return report.partial() ? kPartialExit : kOk;
  }
};

/// Counts interior local maxima of a sampled curve.
json shape_summary(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < ys.size(); ++i)
    if (ys[i] > ys[i - 1] && ys[i] >= ys[i + 1]) peaks.push_back(xs[i]);
  const auto best = std::max_element(ys.begin(), ys.end()) - ys.begin();
  return {{"local_maxima", peaks}, {"single_peak", peaks.size() == 1}, {"argmax", xs[static_cast<std::size_t>(best)]}};
}

struct ScanCmd {
  std::string kind = "penalty";
  std::string side = "prospective";
  ParamFlags params{0.9, 1.0, 10.0, 0.9};
  double beta_prev = 1.5;
  double beta_next = 0.0;
  double x = 1.0;
  double lo = -3.0;
  double hi = 3.0;
  long points = 601;
  std::string out;

  void attach(CLI::App* app) {
    app->add_option("--kind", kind)->check(CLI::IsMember({"penalty", "threshold"}))->capture_default_str();
    app->add_option("--side", side, "penalty read as a function of beta_t (prospective) or beta_{t-1} (retrospective)")
        ->check(CLI::IsMember({"prospective", "retrospective"}))
        ->capture_default_str();
    params.attach(app);
    app->add_option("--beta-prev", beta_prev)->capture_default_str();
    app->add_option("--beta-next", beta_next)->capture_default_str();
    app->add_option("--x", x, "design value for threshold scans")->capture_default_str();
    app->add_option("--lo", lo)->capture_default_str();
    app->add_option("--hi", hi)->capture_default_str();
    app->add_option("--points", points)->capture_default_str();
    app->add_option("--out", out)->required();
  }

  int run(const CLI::App& root) const {
    if (points < 3 || !(hi > lo)) throw dss::ConfigError("scan needs --points >= 3 and --hi > --lo");
    const dss::DssParams prm = params.params();
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (long i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);

    OutputDir dir(out);
    json extra;
    if (kind == "penalty") {
      std::vector<double> values;
      for (double b : grid)
        values.push_back(side == "prospective" ? dss::prospective_pen(b, beta_prev, prm)
                                               : dss::retrospective_pen(beta_next, b, prm));
      dir.write("scan.csv", [&](std::ostream& os) {
        os.precision(17);
        os << "beta,value\n";
        for (std::size_t i = 0; i < grid.size(); ++i) os << grid[i] << ',' << values[i] << '\n';
      });
      extra = shape_summary(grid, values);
    } else {
      // thresholds as functions of the neighbouring coefficient
      dir.write("scan.csv", [&](std::ostream& os) {
        os.precision(17);
        os << "beta_prev,lower,upper\n";
        for (double b : grid) {
          const auto th = dss::selection_thresholds(x, b, beta_next, prm);
          os << b << ',' << th.lower << ',' << th.upper << '\n';
        }
      });
    }
    dir.manifest(root, "scan", "ok", extra.is_null() ? json::object() : extra);
    std::cout << "scan written to " << out << '\n';
    return kOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic spike-and-slab smoothing toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML file with flag values")->configurable(false);

  SimulateCmd simulate;
  FitCmd fit;
  GridCmd grid;
  ForecastCmd forecast;
  ScanCmd scan;
  auto* s_sim = app.add_subcommand("simulate", "draw a synthetic benchmark panel");
  auto* s_fit = app.add_subcommand("fit", "fit dss, dlm or lasso to a dataset");
  auto* s_grid = app.add_subcommand("grid", "replicated synthetic grid study");
  auto* s_fc = app.add_subcommand("forecast", "expanding-window one-step forecasts");
  auto* s_scan = app.add_subcommand("scan", "penalty and threshold curves");
  simulate.attach(s_sim);
  fit.attach(s_fit);
  grid.attach(s_grid);
  forecast.attach(s_fc);
  scan.attach(s_scan);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigExit;
  }

  try {
    if (*s_sim) return simulate.run(app);
    if (*s_fit) return fit.run(app);
    if (*s_grid) return grid.run(app);
    if (*s_fc) return forecast.run(app);
    if (*s_scan) return scan.run(app);
  } catch (const dss::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const dss::DomainError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const dss::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataExit;
  } catch (const dss::StructuralError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataExit;
  } catch (const dss::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalExit;
  }
  return kConfigExit;
}
