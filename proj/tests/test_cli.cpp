#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string output;
};

CliResult run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "dss_cli_test.log";
  const std::string cmd = std::string(DSS_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("dss_cli_" + name);
  fs::remove_all(d);
  return d;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, SimulateWritesFourFilesReproducibly) {
  const fs::path a = scratch("sim_a");
  ASSERT_EQ(run("simulate --p 10 --T 30 --seed 4 --out " + a.string()).code, 0);
  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(a)) first[e.path().filename().string()] = slurp(e.path());
  ASSERT_EQ(run("simulate --p 10 --T 30 --seed 4 --out " + a.string()).code, 0);
  EXPECT_EQ(first.size(), 4u);
  for (const auto& [name, bytes] : first) EXPECT_EQ(bytes, slurp(a / name)) << name;
  for (const char* f : {"dataset.csv", "true_path.csv", "mask.csv", "manifest.json"}) EXPECT_TRUE(first.count(f)) << f;
  EXPECT_EQ(count_lines(first["dataset.csv"]), 31u);
  EXPECT_EQ(first["dataset.csv"].find('\r'), std::string::npos);
}

TEST(Cli, ConfigFileReproducesRun) {
  const fs::path a = scratch("cfg_a"), b = scratch("cfg_b");
  ASSERT_EQ(run("simulate --p 7 --T 12 --seed 9 --out " + a.string()).code, 0);
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  const fs::path cfg = fs::temp_directory_path() / "dss_cli_cfg.toml";
  std::ofstream(cfg) << manifest["config_toml"].get<std::string>();
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + b.string()).code, 0);
  EXPECT_EQ(slurp(a / "dataset.csv"), slurp(b / "dataset.csv"));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("simulate --p 3 --out " + scratch("bad").string()).code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("fit --data x.csv --method nope --out " + scratch("bad2").string()).code, 2);
  const CliResult missing = run("fit --data /nonexistent/panel.csv --out " + scratch("bad3").string());
  EXPECT_EQ(missing.code, 3);
  EXPECT_NE(missing.output.find("/nonexistent/panel.csv"), std::string::npos) << missing.output;
}

TEST(Cli, FitDssAndDlm) {
  const fs::path sim = scratch("fit_sim"), dss_out = scratch("fit_dss"), dlm_out = scratch("fit_dlm");
  ASSERT_EQ(run("simulate --p 8 --T 40 --seed 2 --out " + sim.string()).code, 0);
  const std::string data = (sim / "dataset.csv").string();

  const CliResult r = run("fit --data " + data + " --out " + dss_out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("final objective"), std::string::npos);
  const auto fit = nlohmann::json::parse(slurp(dss_out / "fit.json"));
  EXPECT_TRUE(fit["converged"].get<bool>());
  EXPECT_EQ(count_lines(slurp(dss_out / "coefficients.csv")), 42u);
  EXPECT_EQ(count_lines(slurp(dss_out / "weights.csv")), 41u);

  ASSERT_EQ(run("fit --method dlm --data " + data + " --out " + dlm_out.string()).code, 0);
  EXPECT_EQ(run("fit --data " + data + " --theta 1.5 --out " + scratch("bad4").string()).code, 2);
  std::istringstream in(slurp(dlm_out / "coefficients.csv"));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string c;
    std::getline(cells, c, ',');
    while (std::getline(cells, c, ',')) EXPECT_NE(std::stod(c), 0.0);
  }
}

TEST(Cli, PenaltyScanReportsSinglePeak) {
  const fs::path out = scratch("scan");
  ASSERT_EQ(run("scan --kind penalty --beta-prev 1.5 --out " + out.string()).code, 0);
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_TRUE(m["single_peak"].get<bool>());
  EXPECT_EQ(count_lines(slurp(out / "scan.csv")), 602u);
  const fs::path th = scratch("scan_th");
  ASSERT_EQ(run("scan --kind threshold --out " + th.string()).code, 0);
}

TEST(Cli, ForecastWritesOneFilePerMethod) {
  const fs::path out = scratch("fc");
  const CliResult r = run("forecast --p 6 --T 40 --split 30 --methods dss dlm --workers 1 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(count_lines(slurp(out / "msfe_dss.csv")), 11u);
  EXPECT_EQ(count_lines(slurp(out / "msfe_dlm.csv")), 11u);
  EXPECT_FALSE(fs::exists(out / "msfe_lasso.csv"));
}

TEST(Cli, SmallGridHasFullTable) {
  const fs::path out = scratch("grid");
  const CliResult r = run("grid --p 6 --T 25 --reps 1 --max-iters 50 --no-runtime --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(count_lines(slurp(out / "table.csv")), 27u);
}

TEST(Cli, FitDefaultsConvergeAtTableSize) {
  const fs::path sim = scratch("big_sim"), out = scratch("big_fit");
  ASSERT_EQ(run("simulate --p 50 --T 100 --seed 1 --out " + sim.string()).code, 0);
  const CliResult r = run("fit --data " + (sim / "dataset.csv").string() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto fit = nlohmann::json::parse(slurp(out / "fit.json"));
  EXPECT_TRUE(fit["converged"].get<bool>()) << fit.dump();
}
