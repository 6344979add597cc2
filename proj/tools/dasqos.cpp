#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "dasqos/error.hpp"
#include "dasqos/workbench/commands.hpp"
#include "dasqos/workbench/config.hpp"

namespace wb = dasqos::workbench;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
  std::optional<int> threads;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config, "scenario file (YAML)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "override run.seed");
  cmd->add_option("--samples", f.samples, "override run.samples")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.threads, "cap on worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("-o,--out", f.out, "CSV output path (default: run.output, else stdout)");
}

wb::ScenarioConfig load(const CommonFlags& f) {
  auto cfg = wb::load_config(f.config);
  if (f.seed) cfg.run.seed = *f.seed;
  if (f.samples) cfg.run.samples = *f.samples;
  if (f.threads) cfg.run.threads = *f.threads;
  if (!f.out.empty()) cfg.run.output = f.out;
  return cfg;
}

template <class Fn>
int with_output(const wb::ScenarioConfig& cfg, Fn&& fn) {
  if (cfg.run.output.empty() || cfg.run.output == "-") return fn(std::cout);
  std::ofstream file(cfg.run.output);
  if (!file) throw dasqos::ValidationError(cfg.run.output + ": cannot open for writing");
  const int rc = fn(file);
  std::cerr << "wrote " << cfg.run.output << "\n";
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dasqos: delay QoS and distributed-antenna placement workbench"};
  app.require_subcommand(1);

  CommonFlags delay_f, outage_f, optimize_f, sweep_f;
  bool simulate = false;
  std::optional<int> flow;
  std::string layout_out;

  auto* delay = app.add_subcommand("delay", "delay-bound violation curve for one flow");
  add_common(delay, delay_f);
  delay->add_flag("--simulate", simulate, "add simulated CCDF columns and a comparison report");
  delay->add_option("--flow", flow, "priority index of the flow (default: lowest priority)")
      ->check(CLI::PositiveNumber);

  auto* outage = app.add_subcommand("outage", "outage for fixed users, or E(P) over user placements");
  add_common(outage, outage_f);

  auto* optimize = app.add_subcommand("optimize", "Robbins-Monro antenna placement");
  add_common(optimize, optimize_f);
  optimize->add_option("--layout-out", layout_out, "write the final geometry block to this file");

  auto* sweep = app.add_subcommand("sweep", "E(P) over a radius grid for evenly spaced antennas");
  add_common(sweep, sweep_f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : wb::kExitValidation;
  }

  try {
    if (*delay) {
      auto cfg = load(delay_f);
      if (flow) {
        if (*flow > static_cast<int>(cfg.flows.size()))
          throw dasqos::ValidationError("--flow " + std::to_string(*flow) + " exceeds the number of flows");
        cfg.run.flow = *flow;
      }
      return with_output(cfg, [&](std::ostream& os) {
        return wb::cmd_delay(cfg, {simulate}, os, std::cerr);
      });
    }
    if (*outage) {
      const auto cfg = load(outage_f);
      return with_output(cfg, [&](std::ostream& os) { return wb::cmd_outage(cfg, os, std::cerr); });
    }
    if (*optimize) {
      const auto cfg = load(optimize_f);
      wb::OptimizeOutput result;
      const int rc = with_output(cfg, [&](std::ostream& os) {
        return wb::cmd_optimize(cfg, os, std::cerr, &result);
      });
      if (!layout_out.empty()) {
        std::ofstream f(layout_out);
        if (!f) throw dasqos::ValidationError(layout_out + ": cannot open for writing");
        f << result.layout_yaml;
      }
      return rc;
    }
    if (*sweep) {
      const auto cfg = load(sweep_f);
      return with_output(cfg, [&](std::ostream& os) { return wb::cmd_sweep(cfg, os, std::cerr); });
    }
  } catch (const dasqos::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return wb::kExitValidation;
  } catch (const dasqos::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return wb::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return wb::kExitOk;
}
