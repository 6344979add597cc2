#pragma once

// Slot-level simulation of the N-priority uplink queue.
//
// Each slot: packets that arrived during the previous slot join their flow's
// queue at the boundary, then the head-of-line packet of the highest-priority
// non-empty queue makes one transmission attempt, which fails with
// probability p. Unit-service packets leave after their single attempt (a
// failure is a loss); truncated-geometric packets stay at the head until they
// succeed or exhaust their attempts. Priority is re-evaluated every slot, so
// higher-priority arrivals interleave between retransmissions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "dasqos/error.hpp"
#include "dasqos/rng.hpp"
#include "dasqos/traffic_models.hpp"

namespace dasqos {

enum class DelayConvention {
  sojourn,  // join boundary to end of the final attempt, >= 1 slot
  waiting,  // join boundary to start of the first attempt, >= 0 slots
};

inline const char* to_string(DelayConvention c) {
  return c == DelayConvention::sojourn ? "sojourn" : "waiting";
}

struct SimConfig {
  std::vector<TrafficFlow> flows;
  double outage_probability = 0.0;  // per attempt, shared by all flows
  std::int64_t horizon = 1000000;   // slots
  std::int64_t warmup = 10000;      // slots excluded from statistics
  std::uint64_t seed = 1;
  DelayConvention delay_convention = DelayConvention::sojourn;
  bool check_invariants = false;
  int batches = 50;  // batch means for the queue-length standard error
};

struct Proportion {
  double value = 0.0;
  double low = 0.0;
  double high = 0.0;
  std::int64_t events = 0;
  std::int64_t trials = 0;
};

/// Wilson score interval at z (default 95%).
inline Proportion wilson(std::int64_t events, std::int64_t trials, double z = 1.959963984540054) {
  if (trials <= 0) return {0.0, 0.0, 1.0, events, trials};
  const double n = static_cast<double>(trials);
  const double p = events / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  const double low = events == 0 ? 0.0 : std::max(0.0, center - half);
  const double high = events == trials ? 1.0 : std::min(1.0, center + half);
  return {p, low, high, events, trials};
}

struct FlowStats {
  std::string name;
  int priority = 0;
  std::int64_t arrived = 0;    // joined after warmup
  std::int64_t completed = 0;  // of those, departed before the horizon (served or lost)
  std::int64_t lost = 0;
  std::vector<std::int64_t> sojourn_histogram;
  std::vector<std::int64_t> waiting_histogram;
  double sojourn_sum = 0.0;
  double mean_queue = 0.0;  // time-average packets in system (incl. head of line)
  double mean_queue_se = 0.0;
  std::int64_t served_attempts = 0;

  const std::vector<std::int64_t>& histogram(DelayConvention c) const {
    return c == DelayConvention::sojourn ? sojourn_histogram : waiting_histogram;
  }

  /// Number of completed packets with delay > d.
  std::int64_t exceed_count(DelayConvention c, int d) const {
    const auto& h = histogram(c);
    std::int64_t acc = 0;
    for (std::size_t k = static_cast<std::size_t>(std::max(d + 1, 0)); k < h.size(); ++k)
      acc += h[k];
    return acc;
  }

  Proportion ccdf(DelayConvention c, int d) const { return wilson(exceed_count(c, d), completed); }

  Proportion loss_rate() const { return wilson(lost, completed); }

  double mean_sojourn() const { return completed ? sojourn_sum / completed : 0.0; }
};

struct SimStats {
  std::vector<FlowStats> flows;  // by priority
  std::int64_t measured_slots = 0;
  std::int64_t idle_slots = 0;
  std::int64_t invariant_violations = 0;
  double offered_load = 0.0;
  bool unstable = false;
  DelayConvention delay_convention = DelayConvention::sojourn;

  const FlowStats& flow(int n) const { return flows.at(n - 1); }
};

namespace detail {

struct SimPacket {
  std::int64_t join = 0;
  std::int64_t first_attempt = -1;
  int attempts = 0;
  bool counted = false;  // joined after warmup
};

inline void bump(std::vector<std::int64_t>& h, std::int64_t v) {
  constexpr std::int64_t kCap = 1 << 22;
  const auto k = static_cast<std::size_t>(std::min(v, kCap));
  if (h.size() <= k) h.resize(k + 1, 0);
  ++h[k];
}

}  // namespace detail

inline SimStats simulate(const SimConfig& cfg) {
  validate_flow_set(cfg.flows);
  if (!(cfg.outage_probability >= 0.0 && cfg.outage_probability < 1.0))
    throw ValidationError("simulator: outage probability must be in [0, 1)");
  if (!(cfg.horizon > cfg.warmup) || cfg.warmup < 0)
    throw ValidationError("simulator: need horizon > warmup >= 0");
  if (cfg.batches < 2) throw ValidationError("simulator: need at least two batches");

  std::vector<TrafficFlow> flows = cfg.flows;
  std::sort(flows.begin(), flows.end(),
            [](const TrafficFlow& a, const TrafficFlow& b) { return a.priority < b.priority; });
  const int N = static_cast<int>(flows.size());

  std::vector<int> max_attempts(N, 1);
  for (int n = 0; n < N; ++n) {
    if (const auto* tg = std::get_if<TruncatedGeometric>(&flows[n].service)) {
      if (std::abs(tg->outage_probability - cfg.outage_probability) > 1e-15)
        throw ValidationError("simulator: flow '" + flows[n].name +
                              "' has a service outage probability different from the channel's");
      max_attempts[n] = tg->max_transmissions;
    }
  }

  SimStats stats;
  stats.delay_convention = cfg.delay_convention;
  stats.flows.resize(N);
  for (int n = 0; n < N; ++n) {
    stats.flows[n].name = flows[n].name;
    stats.flows[n].priority = flows[n].priority;
    const Moments x = arrival_moments(flows[n].arrival);
    if (std::isfinite(x.mean)) stats.offered_load += service_moments(flows[n].service).mean / x.mean;
  }
  stats.unstable = !(stats.offered_load < 1.0);

  auto channel = make_stream(cfg.seed, 0);
  std::bernoulli_distribution fails(cfg.outage_probability);
  std::vector<Rng> arrival_rng;
  std::vector<double> next_arrival(N);
  std::vector<std::deque<detail::SimPacket>> queues(N);
  for (int n = 0; n < N; ++n) {
    arrival_rng.push_back(make_stream(cfg.seed, 1 + static_cast<std::uint64_t>(n)));
    next_arrival[n] = sample_interarrival(flows[n].arrival, arrival_rng[n]);
  }

  const std::int64_t measured = cfg.horizon - cfg.warmup;
  const std::int64_t batch_len = std::max<std::int64_t>(1, measured / cfg.batches);
  std::vector<std::vector<double>> batch_sum(N, std::vector<double>(cfg.batches, 0.0));
  std::vector<double> queue_sum(N, 0.0);

  for (std::int64_t t = 0; t < cfg.horizon; ++t) {
    const bool measuring = t >= cfg.warmup;
    for (int n = 0; n < N; ++n) {
      while (next_arrival[n] < static_cast<double>(t)) {
        queues[n].push_back({t, -1, 0, measuring});
        if (measuring) ++stats.flows[n].arrived;
        next_arrival[n] += sample_interarrival(flows[n].arrival, arrival_rng[n]);
      }
    }
    if (measuring) {
      const std::int64_t b = std::min<std::int64_t>((t - cfg.warmup) / batch_len, cfg.batches - 1);
      for (int n = 0; n < N; ++n) {
        const double q = static_cast<double>(queues[n].size());
        queue_sum[n] += q;
        batch_sum[n][b] += q;
      }
    }

    int serve = -1;
    for (int n = 0; n < N; ++n)
      if (!queues[n].empty()) {
        serve = n;
        break;
      }
    if (cfg.check_invariants) {
      // Work conservation and strict priority.
      int lowest_nonempty = -1;
      for (int n = N - 1; n >= 0; --n)
        if (!queues[n].empty()) lowest_nonempty = n;
      if (serve != lowest_nonempty) ++stats.invariant_violations;
    }
    if (serve < 0) {
      if (measuring) ++stats.idle_slots;
      continue;
    }

    auto& pkt = queues[serve].front();
    if (pkt.first_attempt < 0) pkt.first_attempt = t;
    ++pkt.attempts;
    if (measuring) ++stats.flows[serve].served_attempts;
    const bool failed = fails(channel);
    const bool done = !failed || pkt.attempts >= max_attempts[serve];
    if (!done) continue;

    if (pkt.counted) {
      auto& fs = stats.flows[serve];
      ++fs.completed;
      if (failed) ++fs.lost;
      const std::int64_t sojourn = t + 1 - pkt.join;
      detail::bump(fs.sojourn_histogram, sojourn);
      detail::bump(fs.waiting_histogram, pkt.first_attempt - pkt.join);
      fs.sojourn_sum += static_cast<double>(sojourn);
    }
    queues[serve].pop_front();
  }

  stats.measured_slots = measured;
  for (int n = 0; n < N; ++n) {
    auto& fs = stats.flows[n];
    fs.mean_queue = queue_sum[n] / static_cast<double>(measured);
    // Batch means; the last batch absorbs the remainder slots.
    std::vector<double> means(cfg.batches);
    for (int b = 0; b < cfg.batches; ++b) {
      const std::int64_t len =
          b + 1 < cfg.batches ? batch_len : measured - batch_len * (cfg.batches - 1);
      means[b] = len > 0 ? batch_sum[n][b] / static_cast<double>(len) : fs.mean_queue;
    }
    double var = 0.0;
    for (double m : means) var += (m - fs.mean_queue) * (m - fs.mean_queue);
    var /= (cfg.batches - 1);
    fs.mean_queue_se = std::sqrt(var / cfg.batches);
  }
  return stats;
}

struct ComparisonRow {
  int threshold = 0;
  Proportion simulated;
  double analytic = 0.0;
  bool included = false;  // enough tail events
  double log10_gap = 0.0;
};

struct ComparisonReport {
  int flow = 0;
  DelayConvention convention = DelayConvention::sojourn;
  std::vector<ComparisonRow> rows;
  std::vector<int> excluded;   // thresholds with fewer than min_events tail events
  double fitted_slope = 0.0;   // of ln CCDF per slot
  double analytic_slope = 0.0; // -A_n(phi*)
  double slope_ratio = 0.0;
  double max_abs_log10_gap = 0.0;
  double mean_log10_gap = 0.0;
};

/// Compares the simulated delay CCDF of flow n with exp(-decay_rate * d) at
/// integer thresholds [first, last]. The slope is a least-squares fit of the
/// log CCDF over included thresholds >= fit_from.
inline ComparisonReport compare_with_analysis(const SimStats& stats, int n, double decay_rate,
                                              DelayConvention convention, int first, int last,
                                              int min_events = 30, int fit_from = 1) {
  if (first < 0 || last < first) throw ValidationError("comparison: bad threshold range");
  const auto& fs = stats.flow(n);
  ComparisonReport rep;
  rep.flow = n;
  rep.convention = convention;
  rep.analytic_slope = -decay_rate;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, gap_sum = 0;
  int k = 0, included = 0;
  for (int d = first; d <= last; ++d) {
    ComparisonRow row;
    row.threshold = d;
    row.simulated = fs.ccdf(convention, d);
    row.analytic = std::exp(-decay_rate * d);
    row.included = row.simulated.events >= min_events;
    if (row.included) {
      row.log10_gap = std::log10(row.simulated.value) - std::log10(row.analytic);
      rep.max_abs_log10_gap = std::max(rep.max_abs_log10_gap, std::abs(row.log10_gap));
      gap_sum += row.log10_gap;
      ++included;
      if (d >= fit_from) {
        const double y = std::log(row.simulated.value);
        sx += d;
        sy += y;
        sxx += double(d) * d;
        sxy += d * y;
        ++k;
      }
    } else {
      rep.excluded.push_back(d);
    }
    rep.rows.push_back(row);
  }
  if (k >= 2) {
    rep.fitted_slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    rep.slope_ratio = rep.analytic_slope != 0.0 ? rep.fitted_slope / rep.analytic_slope : 0.0;
  }
  rep.mean_log10_gap = included ? gap_sum / included : 0.0;
  return rep;
}

}  // namespace dasqos
