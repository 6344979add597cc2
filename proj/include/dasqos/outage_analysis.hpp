#pragma once

// Uplink outage at the distributed antennas of the target cell.
//
// Antenna m decodes the target user when the signal-to-interference ratio
// X_0 / sum_i X_i exceeds K = 2^R - 1, where X_i = rho_{m,i}^{-2lambda} |h|^2
// with |h|^2 ~ Exp(1), and interferer i is ON with probability alpha. For
// alpha = 1 the outage P(K Y - X_0 > 0) is the right-tail mass of a rational
// Laplace transform, inverted by partial fractions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dasqos/cell_geometry.hpp"
#include "dasqos/error.hpp"
#include "dasqos/parallel.hpp"
#include "dasqos/partial_fractions.hpp"
#include "dasqos/rng.hpp"

namespace dasqos {

struct ChannelParams {
  double path_loss_exponent = 4.0;  // 2 lambda
  double rate = 1.0;                // R, bits/s/Hz
  double activity = 1.0;            // alpha, interferer ON probability
  double tx_power = 1.0;            // W; cancels in the SIR, kept for documentation

  double threshold() const { return std::exp2(rate) - 1.0; }

  void validate() const {
    if (!(path_loss_exponent > 0.0)) throw ValidationError("channel: path loss exponent must be > 0");
    if (!(rate > 0.0)) throw ValidationError("channel: rate must be > 0");
    if (!(activity >= 0.0 && activity <= 1.0))
      throw ValidationError("channel: activity must be in [0, 1]");
    if (!(tx_power > 0.0)) throw ValidationError("channel: tx power must be > 0");
  }
};

struct CellScenario {
  ClusterLayout layout;
  ChannelParams channel;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

enum class OutageMethod { closed_form, monte_carlo };

struct AntennaOutage {
  double probability = 0.0;
  double std_error = 0.0;
  OutageMethod method = OutageMethod::closed_form;
};

/// rho_{m,i}^{2 lambda} for every user i; index 0 is the target.
inline void path_gain_rates(const std::vector<Point2>& users, const PolarPosition& antenna,
                            double height, double path_loss_exponent, std::vector<double>& out) {
  out.resize(users.size());
  const double half = 0.5 * path_loss_exponent;
  const double ax = antenna.radius * std::cos(antenna.angle);
  const double ay = antenna.radius * std::sin(antenna.angle);
  for (std::size_t i = 0; i < users.size(); ++i) {
    const double dx = users[i].x - ax;
    const double dy = users[i].y - ay;
    const double d2 = dx * dx + dy * dy + height * height;
    out[i] = half == 1.0 ? d2 : (half == 2.0 ? d2 * d2 : std::pow(d2, half));
  }
}

/// Expansion of the transform of K Y - X_0 for decay rates a_i = rho_i^{2 lambda}.
inline PartialFractionExpansion outage_expansion(std::span<const double> rates, double K) {
  std::vector<double> others;
  others.reserve(rates.size() - 1);
  double scale = -rates[0];
  for (std::size_t i = 1; i < rates.size(); ++i) {
    others.push_back(rates[i] / K);
    scale *= rates[i] / K;
  }
  return PartialFractionExpansion::build(scale, -rates[0], others);
}

/// Closed-form outage (activity 1) from decay rates. Throws
/// ClosedFormUnavailable when the poles are too close to resolve or the
/// result leaves [0, 1] by more than 1e-9.
inline double outage_from_rates(std::span<const double> rates, double K) {
  if (rates.size() < 2) return 0.0;  // no interferers
  const auto pf = outage_expansion(rates, K);
  if (pf.ill_conditioned())
    throw ClosedFormUnavailable("closed-form outage: interferer poles nearly coincide");
  const double p = pf.right_tail_mass();
  if (!std::isfinite(p) || p < -1e-9 || p > 1.0 + 1e-9)
    throw ClosedFormUnavailable("closed-form outage: residue sum left [0, 1] (" +
                                std::to_string(p) + ")");
  return std::clamp(p, 0.0, 1.0);
}

/// One fading/activity draw of the SIR; +inf when every interferer is OFF.
template <class Urbg>
double sinr_from_rates(std::span<const double> rates, double activity, Urbg& rng) {
  std::exponential_distribution<double> fade(1.0);
  std::bernoulli_distribution on(activity);
  const double signal = fade(rng) / rates[0];
  double interference = 0.0;
  for (std::size_t i = 1; i < rates.size(); ++i) {
    const bool active = on(rng);
    const double h = fade(rng);
    if (active) interference += h / rates[i];
  }
  if (interference == 0.0) return std::numeric_limits<double>::infinity();
  return signal / interference;
}

template <class Urbg>
Estimate outage_mc_from_rates(std::span<const double> rates, const ChannelParams& ch,
                              std::int64_t trials, Urbg& rng) {
  if (trials < 1) throw ValidationError("monte carlo outage: trials must be >= 1");
  const double K = ch.threshold();
  std::int64_t hits = 0;
  if (ch.activity > 0.0 && rates.size() > 1)
    for (std::int64_t t = 0; t < trials; ++t) hits += sinr_from_rates(rates, ch.activity, rng) < K;
  const double p = static_cast<double>(hits) / trials;
  return {p, std::sqrt(p * (1.0 - p) / trials), trials};
}

namespace detail {

inline std::vector<double> rates_for(const CellScenario& sc, const AntennaVector& antennas,
                                     const UserVector& users, int m) {
  if (users.size() != sc.layout.size())
    throw ValidationError("user vector does not match the cluster size");
  std::vector<double> rates;
  path_gain_rates(users.positions(), antennas[m], antennas.height(),
                  sc.channel.path_loss_exponent, rates);
  return rates;
}

}  // namespace detail

template <class Urbg>
double instantaneous_sinr_sample(const CellScenario& sc, const AntennaVector& antennas,
                                 const UserVector& users, int m, Urbg& rng) {
  const auto rates = detail::rates_for(sc, antennas, users, m);
  return sinr_from_rates(std::span<const double>(rates), sc.channel.activity, rng);
}

inline double antenna_outage_closed_form(const CellScenario& sc, const AntennaVector& antennas,
                                         const UserVector& users, int m) {
  sc.channel.validate();
  if (sc.channel.activity != 1.0)
    throw ClosedFormUnavailable("closed-form outage requires activity = 1");
  const auto rates = detail::rates_for(sc, antennas, users, m);
  return outage_from_rates(rates, sc.channel.threshold());
}

template <class Urbg>
Estimate antenna_outage_mc(const CellScenario& sc, const AntennaVector& antennas,
                           const UserVector& users, int m, std::int64_t trials, Urbg& rng) {
  sc.channel.validate();
  const auto rates = detail::rates_for(sc, antennas, users, m);
  return outage_mc_from_rates(std::span<const double>(rates), sc.channel, trials, rng);
}

/// Trial-partitioned Monte Carlo; deterministic in (seed, trials) for any
/// thread count.
inline Estimate antenna_outage_mc_parallel(const CellScenario& sc, const AntennaVector& antennas,
                                           const UserVector& users, int m, std::int64_t trials,
                                           std::uint64_t seed, int threads) {
  sc.channel.validate();
  if (trials < 1) throw ValidationError("monte carlo outage: trials must be >= 1");
  const auto rates = detail::rates_for(sc, antennas, users, m);
  constexpr std::int64_t kChunk = 1 << 16;
  const int chunks = static_cast<int>((trials + kChunk - 1) / kChunk);
  std::vector<double> hits(chunks, 0.0);
  parallel_for(chunks, threads, [&](int c) {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(c));
    const std::int64_t n = std::min(kChunk, trials - c * kChunk);
    hits[c] = outage_mc_from_rates(std::span<const double>(rates), sc.channel, n, rng).value * n;
  });
  double total = 0.0;
  for (double h : hits) total += h;
  const double p = total / trials;
  return {p, std::sqrt(p * (1.0 - p) / trials), trials};
}

/// Independent antennas: every one of them must fail.
inline double system_outage(std::span<const double> per_antenna) {
  double p = 1.0;
  for (double q : per_antenna) {
    if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("system outage: probabilities must be in [0, 1]");
    p *= q;
  }
  return p;
}

struct OutageOptions {
  std::int64_t mc_trials = 100000;  // per antenna, when the closed form does not apply
};

/// Closed form when activity is 1, Monte Carlo otherwise or when the
/// closed form is ill-conditioned.
template <class Urbg>
AntennaOutage outage_for_rates(std::span<const double> rates, const ChannelParams& ch,
                               const OutageOptions& opt, Urbg& rng) {
  if (ch.activity == 1.0) {
    try {
      return {outage_from_rates(rates, ch.threshold()), 0.0, OutageMethod::closed_form};
    } catch (const ClosedFormUnavailable&) {
    }
  }
  const auto e = outage_mc_from_rates(rates, ch, opt.mc_trials, rng);
  return {e.value, e.std_error, OutageMethod::monte_carlo};
}

template <class Urbg>
AntennaOutage antenna_outage(const CellScenario& sc, const AntennaVector& antennas,
                             const UserVector& users, int m, const OutageOptions& opt, Urbg& rng) {
  sc.channel.validate();
  const auto rates = detail::rates_for(sc, antennas, users, m);
  return outage_for_rates(std::span<const double>(rates), sc.channel, opt, rng);
}

/// System outage for fixed users, antenna positions given as raw polar
/// coordinates (no ordering requirement).
template <class Urbg>
double conditional_system_outage(const CellScenario& sc, std::span<const PolarPosition> antennas,
                                 double height, const std::vector<Point2>& users,
                                 const OutageOptions& opt, Urbg& rng,
                                 std::vector<double>& scratch, int* fallbacks = nullptr) {
  double p = 1.0;
  for (const auto& a : antennas) {
    path_gain_rates(users, a, height, sc.channel.path_loss_exponent, scratch);
    const auto o = outage_for_rates(std::span<const double>(scratch), sc.channel, opt, rng);
    if (fallbacks && sc.channel.activity == 1.0 && o.method == OutageMethod::monte_carlo)
      ++*fallbacks;
    p *= o.probability;
    if (p == 0.0) break;
  }
  return p;
}

struct ExpectedOutageOptions {
  std::int64_t samples = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  /// Per-antenna fading trials for each user draw when activity < 1, and for
  /// ill-conditioned closed forms.
  std::int64_t mc_trials = 2000;
};

struct ExpectedOutage {
  Estimate estimate;
  int closed_form_fallbacks = 0;
};

inline constexpr std::int64_t kUserChunk = 256;

/// E over uniform user placements of the system outage. User draws depend
/// only on (seed, sample index), so calls with the same seed use common
/// random numbers across antenna layouts.
inline ExpectedOutage expected_outage(const CellScenario& sc,
                                      std::span<const PolarPosition> antennas, double height,
                                      const ExpectedOutageOptions& opt) {
  sc.channel.validate();
  if (opt.samples < 1) throw ValidationError("expected outage: samples must be >= 1");
  const int chunks = static_cast<int>((opt.samples + kUserChunk - 1) / kUserChunk);
  std::vector<double> sum(chunks, 0.0), sum2(chunks, 0.0);
  std::vector<int> fallbacks(chunks, 0);
  const OutageOptions inner{opt.mc_trials};
  parallel_for(chunks, opt.threads, [&](int c) {
    auto user_rng = make_stream(opt.seed, 2 * static_cast<std::uint64_t>(c));
    auto fade_rng = make_stream(opt.seed, 2 * static_cast<std::uint64_t>(c) + 1);
    std::vector<double> scratch;
    const std::int64_t n = std::min(kUserChunk, opt.samples - c * kUserChunk);
    for (std::int64_t s = 0; s < n; ++s) {
      const auto users = sample_user_vector(sc.layout, user_rng);
      const double p = conditional_system_outage(sc, antennas, height, users.positions(), inner,
                                                 fade_rng, scratch, &fallbacks[c]);
      sum[c] += p;
      sum2[c] += p * p;
    }
  });
  double s = 0.0, s2 = 0.0;
  int fb = 0;
  for (int c = 0; c < chunks; ++c) {
    s += sum[c];
    s2 += sum2[c];
    fb += fallbacks[c];
  }
  const double n = static_cast<double>(opt.samples);
  const double mean = s / n;
  const double var = opt.samples > 1 ? std::max(0.0, (s2 - n * mean * mean) / (n - 1.0)) : 0.0;
  return {{mean, std::sqrt(var / n), opt.samples}, fb};
}

inline ExpectedOutage expected_outage(const CellScenario& sc, const AntennaVector& antennas,
                                      const ExpectedOutageOptions& opt) {
  return expected_outage(sc, std::span<const PolarPosition>(antennas.positions()),
                         antennas.height(), opt);
}

}  // namespace dasqos
