#pragma once

// Antenna placement that minimizes the expected system outage.
//
// rm_optimize runs a projected Robbins-Monro descent: every iteration draws
// one user placement, differentiates the conditional system outage by
// central differences, and steps against the gradient with gain
// c_n = c0 * n^-a. The returned layout is the Polyak average of the iterates.
// radius_sweep evaluates E(P) on a radius grid for evenly spaced antennas.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dasqos/cell_geometry.hpp"
#include "dasqos/error.hpp"
#include "dasqos/outage_analysis.hpp"
#include "dasqos/parallel.hpp"
#include "dasqos/rng.hpp"

namespace dasqos {

enum class PlacementMode { radius_only, full_polar };

struct RMConfig {
  PlacementMode mode = PlacementMode::radius_only;
  double step_scale = 15.0;
  double step_exponent = 0.75;
  double fd_step = 1e-4;
  int max_iter = 2000;
  /// Stop once the averaged iterate moves less than `tolerance` (max norm)
  /// over the last `convergence_window` iterations. 0 disables the test.
  int convergence_window = 0;
  double tolerance = 1e-4;
  /// Consecutive iterations a radius may sit on a bound with a gradient
  /// pushing outward before the run is flagged as divergent.
  int divergence_patience = 1000;
  /// E(P) of the averaged iterate is recomputed every `trace_every`
  /// iterations (and on the first and last) from `trace_samples` common
  /// user draws.
  int trace_every = 1;
  std::int64_t trace_samples = 10000;
  int threads = 1;
};

inline double step_sequence(int n, double scale = 15.0, double exponent = 0.75) {
  if (n < 1) throw ValidationError("step sequence: n must be >= 1");
  return scale * std::pow(static_cast<double>(n), -exponent);
}

struct RMTraceRow {
  int n = 0;
  std::vector<double> iterate;  // raw L(n)
  std::vector<double> average;  // Polyak average of L(1..n-1); L(1) at n = 1
  bool evaluated = false;
  Estimate e_outage;  // at the average
};

struct RMResult {
  AntennaVector layout;
  std::vector<RMTraceRow> trace;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  std::string message;
};

/// Maps the optimization vector onto antenna positions.
///   radius_only: x = [r], angles fixed.
///   full_polar:  x = [r_1..r_M, angle_1..angle_M], angles unwrapped.
class PlacementParameterization {
public:
  PlacementParameterization(PlacementMode mode, const AntennaVector& init)
      : mode_(mode), height_(init.height()) {
    for (const auto& p : init.positions()) angles_.push_back(p.angle);
    if (mode == PlacementMode::radius_only) {
      x0_ = {init[0].radius};
    } else {
      for (const auto& p : init.positions()) x0_.push_back(p.radius);
      for (const auto& p : init.positions()) x0_.push_back(p.angle);
    }
  }

  int antennas() const { return static_cast<int>(angles_.size()); }
  int dimension() const { return static_cast<int>(x0_.size()); }
  const std::vector<double>& initial() const { return x0_; }
  double height() const { return height_; }
  PlacementMode mode() const { return mode_; }

  bool is_radius(int k) const { return mode_ == PlacementMode::radius_only || k < antennas(); }

  void positions(std::span<const double> x, std::vector<PolarPosition>& out) const {
    const int M = antennas();
    out.resize(M);
    for (int m = 0; m < M; ++m) {
      if (mode_ == PlacementMode::radius_only)
        out[m] = {x[0], angles_[m]};
      else
        out[m] = {x[m], x[M + m]};
    }
  }

  /// Radii clamped into [0, 1]; angles are left unwrapped so that averages
  /// of iterates near 0 / 2pi stay meaningful.
  void project(std::vector<double>& x) const {
    for (int k = 0; k < dimension(); ++k)
      if (is_radius(k)) x[k] = std::clamp(x[k], 0.0, 1.0);
  }

  AntennaVector layout(std::span<const double> x) const {
    std::vector<PolarPosition> p;
    positions(x, p);
    for (auto& q : p) q.radius = std::clamp(q.radius, 0.0, 1.0);
    return AntennaVector(std::move(p), height_);
  }

private:
  PlacementMode mode_;
  double height_;
  std::vector<double> angles_;
  std::vector<double> x0_;
};

/// Central-difference gradient of the conditional system outage (users fixed).
inline void outage_gradient(const CellScenario& sc, const PlacementParameterization& param,
                            std::span<const double> x, const std::vector<Point2>& users,
                            double step, std::vector<double>& grad) {
  const int d = param.dimension();
  grad.assign(d, 0.0);
  std::vector<double> probe(x.begin(), x.end());
  std::vector<PolarPosition> pos;
  std::vector<double> scratch;
  const OutageOptions opt{};
  Rng unused = make_stream(0);  // closed form only; never drawn from at activity 1
  auto eval = [&](const std::vector<double>& v) {
    param.positions(v, pos);
    return conditional_system_outage(sc, std::span<const PolarPosition>(pos), param.height(),
                                     users, opt, unused, scratch);
  };
  for (int k = 0; k < d; ++k) {
    probe[k] = x[k] + step;
    const double up = eval(probe);
    probe[k] = x[k] - step;
    const double down = eval(probe);
    probe[k] = x[k];
    grad[k] = (up - down) / (2.0 * step);
  }
}

inline RMResult rm_optimize(const CellScenario& sc, const AntennaVector& init, const RMConfig& cfg,
                            std::uint64_t seed) {
  sc.channel.validate();
  if (sc.channel.activity != 1.0)
    throw ValidationError("rm_optimize: gradients use the closed-form outage, which requires "
                          "activity = 1");
  if (cfg.max_iter < 1) throw ValidationError("rm_optimize: max_iter must be >= 1");
  if (!(cfg.fd_step > 0.0)) throw ValidationError("rm_optimize: fd_step must be positive");
  if (!(cfg.step_scale > 0.0)) throw ValidationError("rm_optimize: step_scale must be positive");
  if (cfg.trace_every < 1) throw ValidationError("rm_optimize: trace_every must be >= 1");
  if (cfg.trace_samples < 1) throw ValidationError("rm_optimize: trace_samples must be >= 1");

  const PlacementParameterization param(cfg.mode, init);
  const int d = param.dimension();
  auto user_rng = make_stream(seed, 0);
  const ExpectedOutageOptions trace_opt{cfg.trace_samples, seed ^ 0x5bd1e995ULL, cfg.threads};

  std::vector<double> x = param.initial();
  std::vector<double> avg = x;
  std::vector<double> grad;
  std::vector<int> pinned(d, 0);
  std::vector<std::vector<double>> avg_history;

  RMResult result{init, {}, 0, false, false, {}};
  auto evaluate = [&](const std::vector<double>& v) {
    std::vector<PolarPosition> pos;
    param.positions(v, pos);
    for (auto& q : pos) q.radius = std::clamp(q.radius, 0.0, 1.0);
    return expected_outage(sc, std::span<const PolarPosition>(pos), param.height(), trace_opt)
        .estimate;
  };

  for (int n = 1;; ++n) {
    RMTraceRow row{n, x, avg, false, {}};
    const bool last = n == cfg.max_iter;
    if (n == 1 || last || n % cfg.trace_every == 0) {
      row.evaluated = true;
      row.e_outage = evaluate(avg);
    }
    result.trace.push_back(std::move(row));
    result.iterations = n;
    if (last) break;

    const auto users = sample_user_vector(sc.layout, user_rng);
    outage_gradient(sc, param, x, users.positions(), cfg.fd_step, grad);
    const double gain = step_sequence(n, cfg.step_scale, cfg.step_exponent);
    std::vector<double> next(d);
    for (int k = 0; k < d; ++k) next[k] = x[k] - gain * grad[k];
    param.project(next);

    bool stuck = false;
    for (int k = 0; k < d; ++k) {
      if (!param.is_radius(k)) continue;
      const bool outward = (next[k] == 0.0 && grad[k] > 0.0) || (next[k] == 1.0 && grad[k] < 0.0);
      pinned[k] = outward ? pinned[k] + 1 : 0;
      stuck = stuck || pinned[k] >= cfg.divergence_patience;
    }

    // Polyak average over L(1..n).
    for (int k = 0; k < d; ++k) avg[k] += (x[k] - avg[k]) / n;
    x = std::move(next);

    if (stuck) {
      result.diverged = true;
      result.message = "iterate pinned at a radius bound with a non-vanishing gradient for " +
                       std::to_string(cfg.divergence_patience) + " iterations";
      RMTraceRow tail{n + 1, x, avg, true, evaluate(avg)};
      result.trace.push_back(std::move(tail));
      result.iterations = n + 1;
      break;
    }

    if (cfg.convergence_window > 0) {
      avg_history.push_back(avg);
      const int w = cfg.convergence_window;
      if (static_cast<int>(avg_history.size()) > w) {
        const auto& old = avg_history[avg_history.size() - 1 - w];
        double moved = 0.0;
        for (int k = 0; k < d; ++k) moved = std::max(moved, std::abs(avg[k] - old[k]));
        if (moved < cfg.tolerance) {
          result.converged = true;
          RMTraceRow tail{n + 1, x, avg, true, evaluate(avg)};
          result.trace.push_back(std::move(tail));
          result.iterations = n + 1;
          break;
        }
      }
    }
  }
  result.layout = param.layout(result.trace.back().average);
  return result;
}

struct SweepRow {
  double radius = 0.0;
  Estimate e_outage;
  int closed_form_fallbacks = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t argmin = 0;
};

/// E(P) for evenly spaced antennas at each radius. Every point reuses the
/// same user draws (common random numbers), so curve differences are not
/// swamped by sampling noise.
inline SweepResult radius_sweep(const CellScenario& sc, int antennas, double rotation,
                                double height, const std::vector<double>& radii,
                                const ExpectedOutageOptions& opt) {
  if (radii.empty()) throw ValidationError("radius sweep: empty radius grid");
  SweepResult out;
  out.rows.resize(radii.size());
  ExpectedOutageOptions point = opt;
  point.threads = 1;
  parallel_for(static_cast<int>(radii.size()), opt.threads, [&](int k) {
    const auto layout = symmetric_circle(antennas, radii[k], rotation, height);
    const auto e = expected_outage(sc, layout, point);
    out.rows[k] = {radii[k], e.estimate, e.closed_form_fallbacks};
  });
  for (std::size_t k = 1; k < out.rows.size(); ++k)
    if (out.rows[k].e_outage.value < out.rows[out.argmin].e_outage.value) out.argmin = k;
  return out;
}

}  // namespace dasqos
