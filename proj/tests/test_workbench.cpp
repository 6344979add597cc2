#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dasqos/workbench/commands.hpp"
#include "dasqos/workbench/config.hpp"

using namespace dasqos;
using namespace dasqos::workbench;

namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = fs::temp_directory_path() / ("dasqos_wb_" + name);
  std::ofstream(path) << text;
  return path.string();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DASQOS_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kTwoFlow = R"(flows:
  - {name: voice, priority: 1, arrival: {model: poisson, rate: 0.2}}
  - name: data
    priority: 2
    arrival: {model: poisson, rate: 0.4}
    service: {model: truncated_geometric, max_transmissions: 4}
channel: {outage_probability: 0.1}
run: {thresholds: {from: 0, to: 10, step: 2}, horizon: 200000}
)";

// Target user under the only antenna at height 1, one neighbor whose user
// sits sqrt(3) away: rho_0 = 1, rho_1 = 2.
const char* kTwoCell = R"(channel: {path_loss_exponent: 4, rate: 1}
geometry:
  centers: [[0, 0], [1.7320508075688772, 0]]
  spacing: 1.7320508075688772
  height: 1
  antennas: {layout: explicit, positions: [[0, 0]]}
  users: [[0, 0], [0, 0]]
)";

const char* kSweep = R"(channel: {path_loss_exponent: 2, rate: 1, activity: 1}
geometry:
  cluster_size: 7
  spacing: 2
  antennas: {layout: symmetric_circle, count: 4, radius: 0}
run:
  samples: 400
  radii: {from: 0, to: 0.8, step: 0.2}
)";

}  // namespace

TEST(Config, EveryScenarioParses) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(DASQOS_SCENARIOS)) {
    if (entry.path().extension() != ".yaml") continue;
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 6);
}

TEST(Config, UnknownKeyReportsLocation) {
  const std::string text = "flows:\n  - name: v\n    arrival: {model: poisson, rat: 0.2}\n";
  try {
    parse_config(text, "bad.yaml");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bad.yaml:3:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'rat'"), std::string::npos) << msg;
  }
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(parse_config("flows: []\n"), ValidationError);
  EXPECT_THROW(parse_config("channel: {outage_probability: 1.5}\n"), ValidationError);
  EXPECT_THROW(parse_config("run: {threads: 0}\n"), ValidationError);
  EXPECT_THROW(parse_config("flows: [\n"), ValidationError);
  EXPECT_THROW(parse_config("run: {seed: 1, seed: 2}\n"), ValidationError);
  const std::string clash = std::string(kTwoFlow) + "\n";
  auto mismatch = clash;
  mismatch.replace(mismatch.find("max_transmissions: 4"), 20,
                   "max_transmissions: 4, outage_probability: 0.3");
  EXPECT_THROW(parse_config(mismatch), ValidationError);
}

TEST(Config, RangesAndEnergyMode) {
  const Range r{0.0, 0.9, 0.05};
  const auto v = r.values();
  ASSERT_EQ(v.size(), 19u);
  EXPECT_NEAR(v.back(), 0.9, 1e-12);
  const auto cfg = parse_config(kTwoFlow);
  EXPECT_EQ(cfg.energy_mode(), HigherPriorityMode::exact_poisson);
  EXPECT_EQ(cfg.fixed_outage_probability().value(), 0.1);
  const auto four = load_config(std::string(DASQOS_SCENARIOS) + "/four_flow.yaml");
  EXPECT_EQ(four.energy_mode(), HigherPriorityMode::gaussian);
}

TEST(Commands, DelayCurveIsMonotone) {
  const auto cfg = parse_config(kTwoFlow);
  std::ostringstream out, log;
  EXPECT_EQ(cmd_delay(cfg, {}, out, log), kExitOk);
  const auto rows = read_csv(out.str());
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0][0], "d_th");
  EXPECT_EQ(rows[0][1], "prob_analytic");
  EXPECT_EQ(std::stod(rows[1][1]), 1.0);
  for (std::size_t k = 2; k < rows.size(); ++k) EXPECT_LT(std::stod(rows[k][1]), std::stod(rows[k - 1][1]));
}

TEST(Commands, SimulatedDelayIsReproducible) {
  const auto cfg = parse_config(kTwoFlow);
  std::ostringstream a, b, log;
  cmd_delay(cfg, {true}, a, log);
  cmd_delay(cfg, {true}, b, log);
  EXPECT_EQ(a.str(), b.str());
  const auto rows = read_csv(a.str());
  EXPECT_EQ(rows[0].size(), 6u);
  EXPECT_NE(log.str().find("slope"), std::string::npos);
}

TEST(Commands, UnstableLoadIsNumericalError) {
  auto cfg = parse_config(kTwoFlow);
  cfg.flows[1].arrival = Poisson{0.9};
  std::ostringstream out, log;
  EXPECT_THROW(cmd_delay(cfg, {}, out, log), NumericalError);
}

TEST(Commands, FixedUsersTwoCellCase) {
  const auto cfg = parse_config(kTwoCell);
  std::ostringstream out, log;
  EXPECT_EQ(cmd_outage(cfg, out, log), kExitOk);
  const auto rows = read_csv(out.str());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(std::stod(rows[1][3]), 1.0 / 17.0, 1e-9);
  EXPECT_EQ(rows[1][5], "closed_form");
  EXPECT_EQ(rows[2][0], "system");
  EXPECT_NEAR(std::stod(rows[2][3]), 1.0 / 17.0, 1e-9);
}

TEST(Commands, SilentNeighborsNeverCauseOutage) {
  auto cfg = parse_config(kSweep);
  cfg.run.activities = {0.0, 1.0};
  std::ostringstream out, log;
  cmd_sweep(cfg, out, log);
  const auto rows = read_csv(out.str());
  ASSERT_EQ(rows.size(), 11u);
  int flagged = 0;
  for (std::size_t k = 1; k <= 5; ++k) {
    EXPECT_EQ(std::stod(rows[k][1]), 0.0);
    EXPECT_EQ(std::stod(rows[k][4]), 0.0);
  }
  for (std::size_t k = 6; k <= 10; ++k) {
    EXPECT_GT(std::stod(rows[k][1]), 0.0);
    flagged += rows[k][7] == "1";
  }
  EXPECT_EQ(flagged, 1);
}

TEST(Commands, SweepIndependentOfThreadCount) {
  auto cfg = parse_config(kSweep);
  std::ostringstream a, b, log;
  cmd_sweep(cfg, a, log);
  cfg.run.threads = 3;
  cmd_sweep(cfg, b, log);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Commands, OptimizeLayoutRoundTrips) {
  auto cfg = parse_config(kSweep);
  cfg.run.optimizer.mode = PlacementMode::full_polar;
  cfg.geometry.antennas.radius = 0.3;
  cfg.run.optimizer.max_iter = 50;
  cfg.run.optimizer.trace_every = 25;
  std::ostringstream out, log;
  OptimizeOutput res;
  EXPECT_EQ(cmd_optimize(cfg, out, log, &res), kExitOk);
  const auto rows = read_csv(out.str());
  EXPECT_EQ(rows[0], (std::vector<std::string>{"n", "L1_bar", "theta1_bar", "e_outage_estimate"}));
  EXPECT_EQ(rows.size(), 4u);  // n = 1, 25, 50

  const auto again = parse_config("channel: {path_loss_exponent: 2, rate: 1}\n" + res.layout_yaml);
  const auto a = again.antennas();
  const auto& want = res.result->layout;
  ASSERT_EQ(a.size(), want.size());
  for (int m = 0; m < a.size(); ++m) {
    EXPECT_EQ(a[m].radius, want[m].radius);
    EXPECT_EQ(a[m].angle, want[m].angle);
  }
  EXPECT_EQ(again.layout().spacing(), cfg.layout().spacing());
}

TEST(Commands, SingleIterationOptimize) {
  auto cfg = parse_config(kSweep);
  cfg.geometry.antennas.radius = 0.4;
  cfg.run.optimizer.max_iter = 1;
  std::ostringstream out, log;
  OptimizeOutput res;
  EXPECT_EQ(cmd_optimize(cfg, out, log, &res), kExitOk);
  const auto rows = read_csv(out.str());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(std::stod(rows[1][1]), 0.4);
}

TEST(Cli, ExitCodes) {
  const auto good = write_temp("good.yaml", kTwoFlow);
  EXPECT_EQ(run_cli("delay -c " + good), 0);
  EXPECT_EQ(run_cli("delay -c " + write_temp("typo.yaml", "flows:\n  - {name: v, arival: {}}\n")), 2);
  EXPECT_EQ(run_cli("delay -c " + write_temp("empty.yaml", "flows: []\n")), 2);
  std::string hot = kTwoFlow;
  hot.replace(hot.find("rate: 0.4"), 9, "rate: 0.9");
  EXPECT_EQ(run_cli("delay -c " + write_temp("hot.yaml", hot)), 3);
  EXPECT_EQ(run_cli("delay -c /nonexistent/config.yaml"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
}

TEST(Cli, OutputFileMatchesLibrary) {
  const auto cfg_path = write_temp("sweep.yaml", kSweep);
  const auto out_path = (fs::temp_directory_path() / "dasqos_wb_sweep.csv").string();
  ASSERT_EQ(run_cli("sweep -c " + cfg_path + " --seed 4 -o " + out_path), 0);
  std::ifstream in(out_path);
  std::stringstream file;
  file << in.rdbuf();
  auto cfg = parse_config(kSweep);
  cfg.run.seed = 4;
  std::ostringstream direct, log;
  cmd_sweep(cfg, direct, log);
  EXPECT_EQ(file.str(), direct.str());
}
