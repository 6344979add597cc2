#pragma once

// Delay-bound violation probabilities for a strict-priority single server.
//
// Flow n sees a service process thinned by every higher-priority flow j < n.
// The effective service energy is
//
//   G~_n(phi) = G_n(phi) + sum_{j<n} T_j(u),
//   u = -phi/mu_yn + phi^2 sigma_yn^2 / (2 mu_yn^3),
//
// where T_j is the per-slot log-MGF of the work brought by flow j (Gaussian
// random-sum limit, or the exact Poisson form for unit-service Poisson flows).
// Then P(D_n > d) ~ exp(-A_n(phi*) d) with phi* > 0 solving A_n(phi) + G~_n(-phi) = 0.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dasqos/energy_functions.hpp"
#include "dasqos/error.hpp"
#include "dasqos/traffic_models.hpp"

namespace dasqos {

enum class HigherPriorityMode { gaussian, exact_poisson };

class PrioritySystem {
public:
  explicit PrioritySystem(std::vector<TrafficFlow> flows,
                          HigherPriorityMode mode = HigherPriorityMode::gaussian)
      : flows_(std::move(flows)), mode_(mode) {
    validate_flow_set(flows_);
    std::sort(flows_.begin(), flows_.end(),
              [](const TrafficFlow& a, const TrafficFlow& b) { return a.priority < b.priority; });
    arrival_.reserve(flows_.size());
    service_.reserve(flows_.size());
    for (const auto& f : flows_) {
      arrival_.push_back(arrival_moments(f.arrival));
      service_.push_back(service_moments(f.service));
    }
  }

  int size() const { return static_cast<int>(flows_.size()); }
  HigherPriorityMode mode() const { return mode_; }
  /// 1-based, by priority.
  const TrafficFlow& flow(int n) const { return flows_.at(check(n) - 1); }
  const std::vector<TrafficFlow>& flows() const { return flows_; }
  Moments arrival(int n) const { return arrival_.at(check(n) - 1); }
  Moments service(int n) const { return service_.at(check(n) - 1); }

  /// Sum of mu_y / mu_x over flows 1..n.
  double effective_load(int n) const {
    double load = 0.0;
    for (int j = 1; j <= check(n); ++j) {
      if (std::isfinite(arrival_[j - 1].mean)) load += service_[j - 1].mean / arrival_[j - 1].mean;
    }
    return load;
  }

  bool stable(int n) const { return effective_load(n) < 1.0; }

  EnergyFunction arrival_energy(int n) const { return dasqos::arrival_energy(flow(n).arrival); }

private:
  int check(int n) const {
    if (n < 1 || n > size()) throw ValidationError("flow index out of range");
    return n;
  }

  std::vector<TrafficFlow> flows_;
  HigherPriorityMode mode_;
  std::vector<Moments> arrival_;
  std::vector<Moments> service_;
};

struct DelayQuery {
  int flow = 1;
  double threshold = 0.0;  // slots
};

namespace detail {

inline bool is_unit_poisson(const TrafficFlow& f) {
  return std::holds_alternative<Poisson>(f.arrival) &&
         std::holds_alternative<DeterministicUnit>(f.service);
}

}  // namespace detail

/// Per-slot log-MGF of the work brought by higher-priority flow j, at u.
inline double higher_priority_work_energy(const PrioritySystem& sys, int j, double u) {
  if (sys.mode() == HigherPriorityMode::exact_poisson) {
    const auto& f = sys.flow(j);
    if (!detail::is_unit_poisson(f))
      throw InvalidModeError("exact_poisson mode requires Poisson arrivals with unit service for "
                             "every higher-priority flow (flow " +
                             std::to_string(j) + " is not)");
    return std::get<Poisson>(f.arrival).rate * std::expm1(u);
  }
  const Moments x = sys.arrival(j);
  const Moments y = sys.service(j);
  if (std::isinf(x.mean)) return 0.0;  // silent flow
  const double mean_rate = y.mean / x.mean;
  const double var_rate =
      y.mean * y.mean * x.variance / (x.mean * x.mean * x.mean) + y.variance / x.mean;
  return u * mean_rate + 0.5 * u * u * var_rate;
}

inline double priority_service_energy(const PrioritySystem& sys, int n, double phi) {
  const Moments y = sys.service(n);
  const double curv = phi * phi * y.variance / (2.0 * y.mean * y.mean * y.mean);
  const double own = phi / y.mean + curv;
  const double u = -phi / y.mean + curv;
  double stolen = 0.0;
  for (int j = 1; j < n; ++j) stolen += higher_priority_work_energy(sys, j, u);
  return own + stolen;
}

/// A_n(phi) + G~_n(-phi).
inline double delay_root_function(const PrioritySystem& sys, int n, double phi) {
  return sys.arrival_energy(n)(phi) + priority_service_energy(sys, n, -phi);
}

struct PhiStar {
  double phi = 0.0;
  double residual = 0.0;
  double decay_rate = 0.0;  // A_n(phi*)
  int expansions = 0;
  int bisections = 0;
};

inline constexpr double kPhiBracketCap = 64.0;

inline PhiStar solve_phi_star(const PrioritySystem& sys, int n) {
  const double load = sys.effective_load(n);
  if (!(load < 1.0))
    throw StabilityError("flows 1.." + std::to_string(n) + " have effective load " +
                         std::to_string(load) + " >= 1");
  const auto R = [&](double phi) { return delay_root_function(sys, n, phi); };

  PhiStar out;
  double hi = 1.0;
  while (!(R(hi) > 0.0)) {
    if (hi >= kPhiBracketCap)
      throw NoRootError("no sign change of the delay root function for phi <= 64 (flow " +
                        std::to_string(n) + ")");
    hi *= 2.0;
    ++out.expansions;
  }
  // R < 0 on (0, phi*) since R(0) = 0 and R'(0) < 0 under stability.
  double lo = 0.0;
  double mid = 0.5 * hi;
  double r = R(mid);
  for (int it = 0; it < 400; ++it) {
    mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    r = R(mid);
    ++out.bisections;
    if (r > 0.0)
      hi = mid;
    else
      lo = mid;
    if (std::abs(r) <= 1e-12 && hi - lo <= 1e-12) break;
  }
  out.phi = mid;
  out.residual = r;
  out.decay_rate = sys.arrival_energy(n)(mid);
  return out;
}

inline double delay_violation_probability(const PrioritySystem& sys, const DelayQuery& q) {
  if (!(q.threshold >= 0.0)) throw ValidationError("delay threshold must be >= 0");
  const PhiStar root = solve_phi_star(sys, q.flow);
  return std::exp(-root.decay_rate * q.threshold);
}

struct DelayPoint {
  double threshold = 0.0;
  double probability = 0.0;
};

/// Analytic curve for one flow; the root is solved once.
inline std::vector<DelayPoint> delay_curve(const PrioritySystem& sys, int n,
                                           const std::vector<double>& thresholds) {
  const PhiStar root = solve_phi_star(sys, n);
  std::vector<DelayPoint> out;
  out.reserve(thresholds.size());
  for (double d : thresholds) {
    if (!(d >= 0.0)) throw ValidationError("delay threshold must be >= 0");
    out.push_back({d, std::exp(-root.decay_rate * d)});
  }
  return out;
}

/// Voice, multimedia A, multimedia B, data. Multimedia flows are Markov-fluid
/// renewals with unit service, voice is Poisson with unit service, data is
/// Poisson with truncated geometric service.
struct FourFlowParams {
  double voice_rate = 0.0;
  MarkovFluidRenewal multimedia_a;
  MarkovFluidRenewal multimedia_b;
  double data_rate = 0.0;
  double outage_probability = 0.0;
  int max_transmissions = 1;
};

inline PrioritySystem four_flow_system(const FourFlowParams& p) {
  std::vector<TrafficFlow> flows{
      {1, Poisson{p.voice_rate}, DeterministicUnit{}, "voice"},
      {2, p.multimedia_a, DeterministicUnit{}, "multimedia_a"},
      {3, p.multimedia_b, DeterministicUnit{}, "multimedia_b"},
      {4, Poisson{p.data_rate},
       TruncatedGeometric{p.outage_probability, p.max_transmissions}, "data"}};
  return PrioritySystem(std::move(flows), HigherPriorityMode::gaussian);
}

inline double four_flow_delay(const FourFlowParams& p, double threshold) {
  return delay_violation_probability(four_flow_system(p), {4, threshold});
}

/// Voice (Poisson, unit service) over data (Poisson, truncated geometric).
inline PrioritySystem two_flow_system(double voice_rate, double data_rate, double p, int L,
                                      HigherPriorityMode mode = HigherPriorityMode::exact_poisson) {
  std::vector<TrafficFlow> flows{{1, Poisson{voice_rate}, DeterministicUnit{}, "voice"},
                                 {2, Poisson{data_rate}, TruncatedGeometric{p, L}, "data"}};
  return PrioritySystem(std::move(flows), mode);
}

}  // namespace dasqos
