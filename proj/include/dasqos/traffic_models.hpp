#pragma once

// Arrival and service processes of a prioritized uplink user, reduced to the
// first two moments of the inter-arrival and service times. Time is measured
// in slots and rates in packets/slot.

#include <cmath>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "dasqos/error.hpp"

namespace dasqos {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

struct Poisson {
  double rate = 0.0;
};

/// Hyperexponential renewal: each inter-arrival is Exp(rate1) with
/// probability prob1, otherwise Exp(rate2). The two-state source is treated
/// as an i.i.d. renewal process, so no correlation between gaps.
struct MarkovFluidRenewal {
  double rate1 = 0.0;
  double rate2 = 0.0;
  double prob1 = 0.0;
  double prob2 = 0.0;

  /// Stationary probabilities from the state-switching rates
  /// (switch_12: state 1 -> 2, switch_21: state 2 -> 1).
  static MarkovFluidRenewal from_switching_rates(double rate1, double rate2, double switch_12,
                                                 double switch_21) {
    if (!(switch_12 > 0.0) || !(switch_21 > 0.0))
      throw ValidationError("markov fluid: switching rates must be positive");
    const double p1 = switch_21 / (switch_12 + switch_21);
    return {rate1, rate2, p1, 1.0 - p1};
  }
};

struct GenericRenewal {
  double mean = 0.0;
  double variance = 0.0;
};

using ArrivalModel = std::variant<Poisson, MarkovFluidRenewal, GenericRenewal>;

/// One slot per packet; a failed attempt drops the packet.
struct DeterministicUnit {};

/// Retransmit on failure, at most `max_transmissions` attempts in total.
struct TruncatedGeometric {
  double outage_probability = 0.0;
  int max_transmissions = 1;
};

using ServiceModel = std::variant<DeterministicUnit, TruncatedGeometric>;

struct TrafficFlow {
  int priority = 1;  // 1 = highest
  ArrivalModel arrival;
  ServiceModel service;
  std::string name;
};

inline void validate(const ArrivalModel& a) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Poisson>) {
          // Rate 0 is a silent flow (never arrives).
          if (!(m.rate >= 0.0) || !std::isfinite(m.rate))
            throw ValidationError("poisson arrival: rate must be >= 0");
        } else if constexpr (std::is_same_v<T, MarkovFluidRenewal>) {
          if (!(m.rate1 > 0.0) || !(m.rate2 > 0.0) || !std::isfinite(m.rate1) ||
              !std::isfinite(m.rate2))
            throw ValidationError("markov fluid arrival: rates must be positive");
          if (m.prob1 < 0.0 || m.prob1 > 1.0 || m.prob2 < 0.0 || m.prob2 > 1.0 ||
              std::abs(m.prob1 + m.prob2 - 1.0) > 1e-12)
            throw ValidationError("markov fluid arrival: state probabilities must sum to one");
        } else {
          if (!(m.mean > 0.0) || !(m.variance >= 0.0) || !std::isfinite(m.mean) ||
              !std::isfinite(m.variance))
            throw ValidationError("generic renewal arrival: need mean > 0, variance >= 0");
        }
      },
      a);
}

inline void validate(const ServiceModel& s) {
  if (const auto* tg = std::get_if<TruncatedGeometric>(&s)) {
    if (!(tg->outage_probability >= 0.0) || !(tg->outage_probability < 1.0))
      throw ValidationError("truncated geometric service: outage probability must be in [0, 1)");
    if (tg->max_transmissions < 1)
      throw ValidationError("truncated geometric service: max transmissions must be >= 1");
  }
}

inline Moments arrival_moments(const ArrivalModel& a) {
  validate(a);
  if (const auto* p = std::get_if<Poisson>(&a)) {
    if (p->rate == 0.0) return {HUGE_VAL, HUGE_VAL};
    return {1.0 / p->rate, 1.0 / (p->rate * p->rate)};
  }
  if (const auto* g = std::get_if<GenericRenewal>(&a)) return {g->mean, g->variance};
  const auto& mf = std::get<MarkovFluidRenewal>(a);
  const double mean = mf.prob1 / mf.rate1 + mf.prob2 / mf.rate2;
  const double second =
      2.0 * mf.prob1 / (mf.rate1 * mf.rate1) + 2.0 * mf.prob2 / (mf.rate2 * mf.rate2);
  return {mean, second - mean * mean};
}

inline Moments service_moments(const ServiceModel& s) {
  validate(s);
  const auto* tg = std::get_if<TruncatedGeometric>(&s);
  if (!tg) return {1.0, 0.0};
  const double p = tg->outage_probability;
  const int L = tg->max_transmissions;
  const double pL = std::pow(p, L);
  const double mean = (1.0 - pL) / (1.0 - p);
  const double k = 2.0 * L - 1.0;
  const double var = (p - k * pL + k * pL * p - pL * pL) / ((1.0 - p) * (1.0 - p));
  // Cancellation can leave a tiny negative residue for p close to 0.
  return {mean, var < 0.0 ? 0.0 : var};
}

/// E[z^y] for the truncated geometric service time.
inline double service_pgf(const TruncatedGeometric& s, double z) {
  validate(ServiceModel{s});
  const double p = s.outage_probability;
  const int L = s.max_transmissions;
  const double zp = z * p;
  double head = 0.0;
  if (std::abs(1.0 - zp) < 1e-8) {
    // Removable singularity: sum the geometric series directly.
    double term = (1.0 - p) * z;
    for (int i = 1; i < L; ++i) {
      head += term;
      term *= zp;
    }
  } else {
    head = (1.0 - p) * z * (1.0 - std::pow(zp, L - 1)) / (1.0 - zp);
  }
  return head + std::pow(z, L) * std::pow(p, L - 1);
}

inline double packet_loss_probability(double p, int max_transmissions) {
  validate(ServiceModel{TruncatedGeometric{p, max_transmissions}});
  return std::pow(p, max_transmissions);
}

/// One inter-arrival gap in slots.
template <class Urbg>
double sample_interarrival(const ArrivalModel& a, Urbg& rng) {
  if (const auto* p = std::get_if<Poisson>(&a)) {
    if (p->rate == 0.0) return HUGE_VAL;
    return std::exponential_distribution<double>(p->rate)(rng);
  }
  if (const auto* mf = std::get_if<MarkovFluidRenewal>(&a)) {
    const bool first = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < mf->prob1;
    return std::exponential_distribution<double>(first ? mf->rate1 : mf->rate2)(rng);
  }
  // Generic renewal: moment-matched gamma, or a constant gap when variance is 0.
  const auto& g = std::get<GenericRenewal>(a);
  if (g.variance <= 0.0) return g.mean;
  const double shape = g.mean * g.mean / g.variance;
  return std::gamma_distribution<double>(shape, g.variance / g.mean)(rng);
}

inline Moments flow_arrival_moments(const TrafficFlow& f) { return arrival_moments(f.arrival); }
inline Moments flow_service_moments(const TrafficFlow& f) { return service_moments(f.service); }

/// Priorities must be exactly 1..N (in any order).
inline void validate_flow_set(const std::vector<TrafficFlow>& flows) {
  if (flows.empty()) throw ValidationError("flow set is empty");
  std::vector<bool> seen(flows.size(), false);
  for (const auto& f : flows) {
    if (f.priority < 1 || f.priority > static_cast<int>(flows.size()) || seen[f.priority - 1])
      throw ValidationError("flow priorities must be distinct and contiguous from 1");
    seen[f.priority - 1] = true;
    validate(f.arrival);
    validate(f.service);
  }
}

}  // namespace dasqos
