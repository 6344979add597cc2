#pragma once

// Workbench commands. Each takes a validated scenario, writes its CSV to
// `out` and a human-readable report to `log`, and returns a process exit code.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dasqos/antenna_placement.hpp"
#include "dasqos/error.hpp"
#include "dasqos/outage_analysis.hpp"
#include "dasqos/priority_delay.hpp"
#include "dasqos/queue_simulator.hpp"
#include "dasqos/rng.hpp"
#include "dasqos/workbench/config.hpp"
#include "dasqos/workbench/csv.hpp"

namespace dasqos::workbench {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

struct DelayOptions {
  bool simulate = false;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

inline ExpectedOutageOptions expected_options(const ScenarioConfig& cfg) {
  return {cfg.run.samples, cfg.run.seed, cfg.run.threads, cfg.run.mc_trials};
}

/// Channel outage probability seen by the queues: fixed, or E(P) of the
/// configured geometry when linked.
inline double resolve_outage_probability(const ScenarioConfig& cfg, std::ostream& log) {
  if (const auto p = cfg.fixed_outage_probability()) return *p;
  require(cfg.has_geometry, cfg.source + ": channel.outage_probability 'linked' needs a geometry section");
  const auto e = expected_outage(cfg.cell(), cfg.antennas(), expected_options(cfg));
  log << "linked outage probability E(P) = " << CsvWriter::format(e.estimate.value) << " (s.e. "
      << CsvWriter::format(e.estimate.std_error) << ", " << e.estimate.samples << " samples)\n";
  return e.estimate.value;
}

inline int delay_flow(const ScenarioConfig& cfg) {
  return cfg.run.flow ? *cfg.run.flow : static_cast<int>(cfg.flows.size());
}

inline double common_radius(const AntennaVector& a) {
  const double r = a[0].radius;
  for (int m = 1; m < a.size(); ++m)
    if (a[m].radius != r) return std::nan("");
  return r;
}

}  // namespace detail

/// Analytic delay-violation curve for one flow; with simulation, the
/// simulated CCDF with Wilson intervals next to the analytic value.
inline int cmd_delay(const ScenarioConfig& cfg, const DelayOptions& opt, std::ostream& out,
                     std::ostream& log) {
  detail::require(cfg.has_flows && !cfg.flows.empty(), cfg.source + ": delay needs a non-empty 'flows' section");
  const double p = detail::resolve_outage_probability(cfg, log);
  const auto flows = cfg.flows_with_outage(p);
  const PrioritySystem sys(flows, cfg.energy_mode());
  const int n = detail::delay_flow(cfg);
  const auto root = solve_phi_star(sys, n);
  const auto thresholds = cfg.run.thresholds.values();

  log << "flow " << n << " (" << sys.flow(n).name << "): load "
      << CsvWriter::format(sys.effective_load(n)) << ", phi* " << CsvWriter::format(root.phi)
      << ", decay rate " << CsvWriter::format(root.decay_rate) << ", energy mode "
      << (sys.mode() == HigherPriorityMode::gaussian ? "gaussian" : "exact_poisson") << "\n";

  if (!opt.simulate) {
    CsvWriter csv(out, {"d_th", "prob_analytic"});
    for (const auto& pt : delay_curve(sys, n, thresholds)) csv.row(pt.threshold, pt.probability);
    return kExitOk;
  }

  std::vector<int> grid;
  for (double d : thresholds) {
    detail::require(d == std::floor(d), cfg.source + ": simulated thresholds must be whole slots");
    grid.push_back(static_cast<int>(d));
  }
  SimConfig sc;
  sc.flows = flows;
  sc.outage_probability = p;
  sc.horizon = cfg.run.horizon;
  sc.warmup = cfg.run.warmup;
  sc.seed = cfg.run.seed;
  sc.delay_convention = cfg.run.delay_convention;
  const auto stats = simulate(sc);
  const auto& fs = stats.flow(n);

  CsvWriter csv(out, {"flow", "d_th", "prob_sim", "ci_low", "ci_high", "prob_analytic"});
  for (int d : grid) {
    const auto pr = fs.ccdf(sc.delay_convention, d);
    csv.row(n, d, pr.value, pr.low, pr.high, std::exp(-root.decay_rate * d));
  }

  const auto rep = compare_with_analysis(stats, n, root.decay_rate, sc.delay_convention,
                                         grid.front(), grid.back());
  log << "simulation: " << stats.measured_slots << " slots, convention "
      << to_string(sc.delay_convention) << ", " << fs.completed << " packets";
  if (stats.unstable) log << ", UNSTABLE (offered load " << CsvWriter::format(stats.offered_load) << ")";
  log << "\n";
  log << "  fitted slope " << CsvWriter::format(rep.fitted_slope) << " vs analytic "
      << CsvWriter::format(rep.analytic_slope) << " (ratio " << CsvWriter::format(rep.slope_ratio)
      << ")\n";
  log << "  log10 gap: max |.| " << CsvWriter::format(rep.max_abs_log10_gap) << ", mean "
      << CsvWriter::format(rep.mean_log10_gap) << "\n";
  if (!rep.excluded.empty())
    log << "  " << rep.excluded.size() << " thresholds with too few tail events excluded\n";
  const auto loss = fs.loss_rate();
  double loss_analytic = 0.0;
  if (const auto* tg = std::get_if<TruncatedGeometric>(&sys.flow(n).service))
    loss_analytic = packet_loss_probability(p, tg->max_transmissions);
  log << "  loss rate " << CsvWriter::format(loss.value) << " [" << CsvWriter::format(loss.low)
      << ", " << CsvWriter::format(loss.high) << "], analytic "
      << CsvWriter::format(loss_analytic) << "\n";
  return kExitOk;
}

/// Fixed users: per-antenna and system outage. Otherwise E(P) over users.
inline int cmd_outage(const ScenarioConfig& cfg, std::ostream& out, std::ostream& log) {
  detail::require(cfg.has_geometry, cfg.source + ": outage needs a 'geometry' section");
  const auto sc = cfg.cell();
  const auto antennas = cfg.antennas();
  if (cfg.geometry.users) {
    const UserVector users(sc.layout, *cfg.geometry.users);
    auto rng = make_stream(cfg.run.seed);
    const OutageOptions opt{cfg.run.mc_trials};
    CsvWriter csv(out, {"antenna", "radius", "angle", "outage", "std_err", "method"});
    std::vector<double> per;
    for (int m = 0; m < antennas.size(); ++m) {
      const auto o = antenna_outage(sc, antennas, users, m, opt, rng);
      per.push_back(o.probability);
      csv.row(m + 1, antennas[m].radius, antennas[m].angle, o.probability, o.std_error,
              o.method == OutageMethod::closed_form ? "closed_form" : "monte_carlo");
    }
    const double sys = system_outage(per);
    csv.row("system", std::nan(""), std::nan(""), sys, std::nan(""), "product");
    return kExitOk;
  }
  const auto e = expected_outage(sc, antennas, detail::expected_options(cfg));
  if (e.closed_form_fallbacks > 0)
    log << e.closed_form_fallbacks << " antenna evaluations fell back to Monte Carlo\n";
  CsvWriter csv(out, {"radius", "e_outage", "std_err", "samples", "alpha", "path_loss_exp", "spacing_d"});
  csv.row(detail::common_radius(antennas), e.estimate.value, e.estimate.std_error,
          e.estimate.samples, sc.channel.activity, sc.channel.path_loss_exponent, sc.layout.spacing());
  return kExitOk;
}

struct OptimizeOutput {
  std::optional<RMResult> result;
  std::string layout_yaml;
};

/// Robbins-Monro placement. Writes the evaluated trace rows; the final
/// layout is returned in config syntax.
inline int cmd_optimize(const ScenarioConfig& cfg, std::ostream& out, std::ostream& log,
                        OptimizeOutput* result = nullptr) {
  detail::require(cfg.has_geometry, cfg.source + ": optimize needs a 'geometry' section");
  auto rm = cfg.run.optimizer;
  rm.trace_samples = cfg.run.samples;
  rm.threads = cfg.run.threads;
  const auto init = cfg.antennas();
  const auto res = rm_optimize(cfg.cell(), init, rm, cfg.run.seed);

  const int M = init.size();
  CsvWriter csv(out, {"n", "L1_bar", "theta1_bar", "e_outage_estimate"});
  for (const auto& row : res.trace) {
    if (!row.evaluated) continue;
    const double theta = rm.mode == PlacementMode::radius_only ? init[0].angle : row.average[M];
    csv.row(row.n, row.average[0], wrap_angle(theta), row.e_outage.value);
  }
  const auto yaml = geometry_block(cfg, res.layout);
  log << "iterations: " << res.iterations << (res.converged ? " (converged)" : "") << "\n";
  log << "final E(P): " << CsvWriter::format(res.trace.back().e_outage.value) << " (s.e. "
      << CsvWriter::format(res.trace.back().e_outage.std_error) << ")\n";
  log << "final layout:\n" << yaml;
  if (result) {
    result->result = res;
    result->layout_yaml = yaml;
  }
  if (res.diverged) {
    log << "divergence: " << res.message << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

/// E(P) over a radius grid for every configured activity; the minimizing
/// radius of each curve is flagged.
inline int cmd_sweep(const ScenarioConfig& cfg, std::ostream& out, std::ostream& log) {
  detail::require(cfg.has_geometry, cfg.source + ": sweep needs a 'geometry' section");
  const auto& a = cfg.geometry.antennas;
  detail::require(a.layout == AntennaLayoutKind::symmetric_circle,
                  cfg.source + ": sweep needs geometry.antennas.layout: symmetric_circle");
  auto activities = cfg.run.activities;
  if (activities.empty()) activities.push_back(cfg.channel.params.activity);
  const auto radii = cfg.run.radii.values();

  CsvWriter csv(out, {"radius", "e_outage", "std_err", "samples", "alpha", "path_loss_exp",
                      "spacing_d", "is_argmin"});
  for (double alpha : activities) {
    auto sc = cfg.cell();
    sc.channel.activity = alpha;
    const auto sw = radius_sweep(sc, a.count, a.rotation, cfg.geometry.height, radii,
                                 detail::expected_options(cfg));
    for (std::size_t k = 0; k < sw.rows.size(); ++k) {
      const auto& r = sw.rows[k];
      csv.row(r.radius, r.e_outage.value, r.e_outage.std_error, r.e_outage.samples, alpha,
              sc.channel.path_loss_exponent, sc.layout.spacing(), k == sw.argmin);
    }
    log << "alpha " << CsvWriter::format(alpha) << ": argmin radius "
        << CsvWriter::format(sw.rows[sw.argmin].radius) << ", E(P) "
        << CsvWriter::format(sw.rows[sw.argmin].e_outage.value) << "\n";
  }
  return kExitOk;
}

}  // namespace dasqos::workbench
