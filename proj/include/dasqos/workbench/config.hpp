#pragma once

// Scenario configuration: one YAML document with the sections `flows`,
// `channel`, `geometry` and `run`. Every key is checked; unknown keys and
// out-of-range values are reported as `<file>:<line>:<column>: <message>`.

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <algorithm>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dasqos/antenna_placement.hpp"
#include "dasqos/cell_geometry.hpp"
#include "dasqos/error.hpp"
#include "dasqos/outage_analysis.hpp"
#include "dasqos/priority_delay.hpp"
#include "dasqos/queue_simulator.hpp"
#include "dasqos/traffic_models.hpp"
#include "dasqos/workbench/csv.hpp"

namespace dasqos::workbench {

struct Range {
  double from = 0.0;
  double to = 0.0;
  double step = 1.0;

  std::vector<double> values() const {
    std::vector<double> v;
    const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
    for (long k = 0; k <= n; ++k) v.push_back(from + k * step);
    return v;
  }
};

enum class AntennaLayoutKind { symmetric_circle, explicit_list };

struct AntennaSpec {
  AntennaLayoutKind layout = AntennaLayoutKind::symmetric_circle;
  int count = 4;
  double radius = 0.0;
  double rotation = 0.0;
  std::vector<PolarPosition> positions;
};

struct GeometrySpec {
  int cluster_size = 7;
  double spacing = 2.0;
  std::optional<std::vector<Point2>> centers;
  double height = 0.05;
  AntennaSpec antennas;
  std::optional<std::vector<PolarPosition>> users;
};

struct ChannelSpec {
  ChannelParams params;
  std::optional<double> outage_probability;
  bool linked = false;  // outage probability := E(P) of the geometry
};

enum class EnergyModeSetting { automatic, gaussian, exact_poisson };

struct RunSpec {
  std::uint64_t seed = 1;
  std::int64_t samples = 10000;
  int threads = 1;
  std::int64_t mc_trials = 2000;
  std::int64_t horizon = 10000000;
  std::int64_t warmup = 10000;
  DelayConvention delay_convention = DelayConvention::sojourn;
  EnergyModeSetting energy_mode = EnergyModeSetting::automatic;
  std::optional<int> flow;
  Range thresholds{0.0, 60.0, 1.0};
  Range radii{0.0, 0.9, 0.05};
  std::vector<double> activities;
  RMConfig optimizer;
  std::string output;
};

struct ScenarioConfig {
  std::string source = "<config>";
  std::vector<TrafficFlow> flows;
  bool has_flows = false;
  ChannelSpec channel;
  bool has_channel = false;
  GeometrySpec geometry;
  bool has_geometry = false;
  RunSpec run;

  ClusterLayout layout() const {
    if (geometry.centers) return ClusterLayout(*geometry.centers, geometry.spacing);
    return hex_cluster(geometry.cluster_size, geometry.spacing);
  }

  AntennaVector antennas() const {
    const auto& a = geometry.antennas;
    if (a.layout == AntennaLayoutKind::explicit_list)
      return AntennaVector(a.positions, geometry.height);
    return symmetric_circle(a.count, a.radius, a.rotation, geometry.height);
  }

  CellScenario cell() const { return {layout(), channel.params}; }

  /// Per-attempt outage probability when it does not depend on geometry.
  std::optional<double> fixed_outage_probability() const {
    if (channel.linked) return std::nullopt;
    if (channel.outage_probability) return channel.outage_probability;
    for (const auto& f : flows)
      if (const auto* tg = std::get_if<TruncatedGeometric>(&f.service))
        return tg->outage_probability;
    return 0.0;
  }

  /// Flows with every truncated-geometric service bound to probability p.
  std::vector<TrafficFlow> flows_with_outage(double p) const {
    auto out = flows;
    for (auto& f : out)
      if (auto* tg = std::get_if<TruncatedGeometric>(&f.service)) tg->outage_probability = p;
    return out;
  }

  HigherPriorityMode energy_mode() const {
    if (run.energy_mode == EnergyModeSetting::gaussian) return HigherPriorityMode::gaussian;
    if (run.energy_mode == EnergyModeSetting::exact_poisson)
      return HigherPriorityMode::exact_poisson;
    // Automatic: exact Poisson energies when every flow above the lowest
    // priority is a unit-service Poisson flow.
    int lowest = 0;
    for (const auto& f : flows) lowest = std::max(lowest, f.priority);
    for (const auto& f : flows)
      if (f.priority != lowest && !(std::holds_alternative<Poisson>(f.arrival) &&
                                    std::holds_alternative<DeterministicUnit>(f.service)))
        return HigherPriorityMode::gaussian;
    return HigherPriorityMode::exact_poisson;
  }
};

namespace detail {

class Reader {
public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    const auto m = node.Mark();
    std::ostringstream os;
    os << source_ << ':';
    if (m.is_null())
      os << ' ';
    else
      os << m.line + 1 << ':' << m.column + 1 << ": ";
    os << msg;
    throw ValidationError(os.str());
  }

  void require_map(const YAML::Node& node, const std::string& ctx) const {
    if (!node.IsMap()) fail(node, ctx + " must be a mapping");
  }

  void check_keys(const YAML::Node& node, std::initializer_list<const char*> allowed,
                  const std::string& ctx) const {
    require_map(node, ctx);
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    std::set<std::string> seen;
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!seen.insert(key).second) fail(kv.first, "duplicate key '" + key + "' in " + ctx);
      if (!ok.count(key)) {
        std::string list;
        for (const auto& a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
        fail(kv.first, "unknown key '" + key + "' in " + ctx + " (allowed: " + list + ")");
      }
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, what + ": cannot parse '" + node.Scalar() + "'");
    }
  }

  double number(const YAML::Node& parent, const char* key, const std::string& ctx) const {
    const auto n = parent[key];
    if (!n) fail(parent, ctx + ": missing required key '" + key + "'");
    const double v = scalar<double>(n, ctx + "." + key);
    if (!std::isfinite(v)) fail(n, ctx + "." + key + " must be finite");
    return v;
  }

  template <class T>
  T get_or(const YAML::Node& parent, const char* key, T fallback, const std::string& ctx) const {
    const auto n = parent[key];
    if (!n) return fallback;
    return scalar<T>(n, ctx + "." + key);
  }

  const std::string& source() const { return source_; }

private:
  std::string source_;
};

inline ArrivalModel parse_arrival(const Reader& r, const YAML::Node& n, const std::string& ctx) {
  r.require_map(n, ctx);
  if (!n["model"]) r.fail(n, ctx + ": missing required key 'model'");
  const auto model = r.scalar<std::string>(n["model"], ctx + ".model");
  ArrivalModel a;
  if (model == "poisson") {
    r.check_keys(n, {"model", "rate"}, ctx);
    a = Poisson{r.number(n, "rate", ctx)};
  } else if (model == "markov_fluid") {
    r.check_keys(n, {"model", "rate1", "rate2", "prob1", "prob2", "switch_12", "switch_21"}, ctx);
    const double l1 = r.number(n, "rate1", ctx);
    const double l2 = r.number(n, "rate2", ctx);
    if (n["switch_12"] || n["switch_21"]) {
      if (n["prob1"] || n["prob2"])
        r.fail(n, ctx + ": give either prob1/prob2 or switch_12/switch_21, not both");
      try {
        a = MarkovFluidRenewal::from_switching_rates(l1, l2, r.number(n, "switch_12", ctx),
                                                     r.number(n, "switch_21", ctx));
      } catch (const ValidationError& e) {
        r.fail(n, ctx + ": " + e.what());
      }
    } else {
      const double p1 = r.number(n, "prob1", ctx);
      const double p2 = n["prob2"] ? r.number(n, "prob2", ctx) : 1.0 - p1;
      a = MarkovFluidRenewal{l1, l2, p1, p2};
    }
  } else if (model == "renewal") {
    r.check_keys(n, {"model", "mean", "variance"}, ctx);
    a = GenericRenewal{r.number(n, "mean", ctx), r.number(n, "variance", ctx)};
  } else {
    r.fail(n["model"], ctx + ".model: expected poisson, markov_fluid or renewal, got '" + model + "'");
  }
  try {
    validate(a);
  } catch (const ValidationError& e) {
    r.fail(n, ctx + ": " + e.what());
  }
  return a;
}

inline ServiceModel parse_service(const Reader& r, const YAML::Node& n, const std::string& ctx,
                                  std::optional<double>& explicit_p) {
  r.require_map(n, ctx);
  if (!n["model"]) r.fail(n, ctx + ": missing required key 'model'");
  const auto model = r.scalar<std::string>(n["model"], ctx + ".model");
  if (model == "deterministic_unit") {
    r.check_keys(n, {"model"}, ctx);
    return DeterministicUnit{};
  }
  if (model != "truncated_geometric")
    r.fail(n["model"], ctx + ".model: expected deterministic_unit or truncated_geometric, got '" +
                           model + "'");
  r.check_keys(n, {"model", "max_transmissions", "outage_probability"}, ctx);
  if (!n["max_transmissions"]) r.fail(n, ctx + ": missing required key 'max_transmissions'");
  const int L = r.scalar<int>(n["max_transmissions"], ctx + ".max_transmissions");
  if (L < 1) r.fail(n["max_transmissions"], ctx + ".max_transmissions must be >= 1");
  TruncatedGeometric tg{0.0, L};
  if (n["outage_probability"]) {
    tg.outage_probability = r.number(n, "outage_probability", ctx);
    if (!(tg.outage_probability >= 0.0 && tg.outage_probability < 1.0))
      r.fail(n["outage_probability"], ctx + ".outage_probability must be in [0, 1)");
    explicit_p = tg.outage_probability;
  }
  return tg;
}

inline std::vector<Point2> parse_points(const Reader& r, const YAML::Node& n,
                                        const std::string& ctx) {
  if (!n.IsSequence()) r.fail(n, ctx + " must be a list of [a, b] pairs");
  std::vector<Point2> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto e = n[i];
    const auto where = ctx + "[" + std::to_string(i) + "]";
    if (!e.IsSequence() || e.size() != 2) r.fail(e, where + " must be a pair [a, b]");
    out.push_back({r.scalar<double>(e[0], where), r.scalar<double>(e[1], where)});
  }
  return out;
}

inline std::vector<PolarPosition> to_polar(const std::vector<Point2>& pts) {
  std::vector<PolarPosition> out;
  for (const auto& p : pts) out.push_back({p.x, p.y});
  return out;
}

inline Range parse_range(const Reader& r, const YAML::Node& n, const std::string& ctx) {
  r.check_keys(n, {"from", "to", "step"}, ctx);
  Range g{r.number(n, "from", ctx), r.number(n, "to", ctx), r.get_or(n, "step", 1.0, ctx)};
  if (!(g.step > 0.0)) r.fail(n, ctx + ".step must be positive");
  if (g.to < g.from) r.fail(n, ctx + ": 'to' must be >= 'from'");
  return g;
}

inline RMConfig parse_optimizer(const Reader& r, const YAML::Node& n, const std::string& ctx) {
  r.check_keys(n,
               {"mode", "step_scale", "step_exponent", "fd_step", "max_iter", "window", "tolerance",
                "divergence_patience", "trace_every"},
               ctx);
  RMConfig c;
  if (n["mode"]) {
    const auto m = r.scalar<std::string>(n["mode"], ctx + ".mode");
    if (m == "radius_only")
      c.mode = PlacementMode::radius_only;
    else if (m == "full_polar")
      c.mode = PlacementMode::full_polar;
    else
      r.fail(n["mode"], ctx + ".mode: expected radius_only or full_polar");
  }
  c.step_scale = r.get_or(n, "step_scale", c.step_scale, ctx);
  c.step_exponent = r.get_or(n, "step_exponent", c.step_exponent, ctx);
  c.fd_step = r.get_or(n, "fd_step", c.fd_step, ctx);
  c.max_iter = r.get_or(n, "max_iter", c.max_iter, ctx);
  c.convergence_window = r.get_or(n, "window", c.convergence_window, ctx);
  c.tolerance = r.get_or(n, "tolerance", c.tolerance, ctx);
  c.divergence_patience = r.get_or(n, "divergence_patience", c.divergence_patience, ctx);
  c.trace_every = r.get_or(n, "trace_every", c.trace_every, ctx);
  if (!(c.step_scale > 0.0)) r.fail(n, ctx + ".step_scale must be positive");
  if (!(c.step_exponent > 0.5 && c.step_exponent <= 1.0))
    r.fail(n, ctx + ".step_exponent must be in (0.5, 1]");
  if (!(c.fd_step > 0.0)) r.fail(n, ctx + ".fd_step must be positive");
  if (c.max_iter < 1) r.fail(n, ctx + ".max_iter must be >= 1");
  if (c.convergence_window < 0) r.fail(n, ctx + ".window must be >= 0");
  if (c.trace_every < 1) r.fail(n, ctx + ".trace_every must be >= 1");
  if (c.divergence_patience < 1) r.fail(n, ctx + ".divergence_patience must be >= 1");
  return c;
}

}  // namespace detail

inline ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  detail::Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ValidationError(source + ":" + std::to_string(e.mark.line + 1) + ":" +
                          std::to_string(e.mark.column + 1) + ": YAML syntax error: " + e.msg);
  }
  if (!root || root.IsNull()) throw ValidationError(source + ": empty configuration");
  r.check_keys(root, {"flows", "channel", "geometry", "run"}, "top level");

  ScenarioConfig cfg;
  cfg.source = source;
  std::optional<double> service_p;

  if (const auto flows = root["flows"]) {
    cfg.has_flows = true;
    if (!flows.IsSequence()) r.fail(flows, "flows must be a list");
    if (flows.size() == 0) r.fail(flows, "flows: at least one flow is required");
    for (std::size_t i = 0; i < flows.size(); ++i) {
      const auto f = flows[i];
      const auto ctx = "flows[" + std::to_string(i) + "]";
      r.check_keys(f, {"name", "priority", "arrival", "service"}, ctx);
      TrafficFlow flow;
      flow.name = r.get_or<std::string>(f, "name", "flow" + std::to_string(i + 1), ctx);
      flow.priority = r.get_or(f, "priority", static_cast<int>(i) + 1, ctx);
      if (!f["arrival"]) r.fail(f, ctx + ": missing required key 'arrival'");
      flow.arrival = detail::parse_arrival(r, f["arrival"], ctx + ".arrival");
      if (f["service"]) {
        std::optional<double> p;
        flow.service = detail::parse_service(r, f["service"], ctx + ".service", p);
        if (p) {
          if (service_p && *service_p != *p)
            r.fail(f["service"], ctx + ".service: all flows share one channel outage probability");
          service_p = p;
        }
      } else {
        flow.service = DeterministicUnit{};
      }
      cfg.flows.push_back(std::move(flow));
    }
    try {
      validate_flow_set(cfg.flows);
    } catch (const ValidationError& e) {
      r.fail(flows, std::string("flows: ") + e.what());
    }
  }

  if (const auto ch = root["channel"]) {
    cfg.has_channel = true;
    const std::string ctx = "channel";
    r.check_keys(ch, {"path_loss_exponent", "rate", "activity", "tx_power", "outage_probability"},
                 ctx);
    auto& p = cfg.channel.params;
    p.path_loss_exponent = r.get_or(ch, "path_loss_exponent", p.path_loss_exponent, ctx);
    p.rate = r.get_or(ch, "rate", p.rate, ctx);
    p.activity = r.get_or(ch, "activity", p.activity, ctx);
    p.tx_power = r.get_or(ch, "tx_power", p.tx_power, ctx);
    try {
      p.validate();
    } catch (const ValidationError& e) {
      r.fail(ch, e.what());
    }
    if (const auto op = ch["outage_probability"]) {
      if (op.IsScalar() && op.Scalar() == "linked") {
        cfg.channel.linked = true;
      } else {
        const double v = r.scalar<double>(op, "channel.outage_probability");
        if (!(v >= 0.0 && v < 1.0))
          r.fail(op, "channel.outage_probability must be in [0, 1) or 'linked'");
        if (service_p && *service_p != v)
          r.fail(op, "channel.outage_probability disagrees with a flow's service outage_probability");
        cfg.channel.outage_probability = v;
      }
    }
  }
  if (!cfg.channel.outage_probability && !cfg.channel.linked && service_p)
    cfg.channel.outage_probability = service_p;
  if (cfg.channel.outage_probability)
    cfg.flows = cfg.flows_with_outage(*cfg.channel.outage_probability);

  if (const auto g = root["geometry"]) {
    cfg.has_geometry = true;
    const std::string ctx = "geometry";
    r.check_keys(g, {"cluster_size", "spacing", "centers", "height", "antennas", "users"}, ctx);
    auto& geo = cfg.geometry;
    geo.cluster_size = r.get_or(g, "cluster_size", geo.cluster_size, ctx);
    geo.spacing = r.get_or(g, "spacing", geo.spacing, ctx);
    geo.height = r.get_or(g, "height", geo.height, ctx);
    if (!(geo.spacing > 0.0)) r.fail(g, "geometry.spacing must be positive");
    if (!(geo.height > 0.0)) r.fail(g, "geometry.height must be positive");
    if (g["centers"]) {
      geo.centers = detail::parse_points(r, g["centers"], "geometry.centers");
      if (static_cast<int>(geo.centers->size()) != geo.cluster_size && g["cluster_size"])
        r.fail(g["centers"], "geometry.centers: count does not match cluster_size");
      geo.cluster_size = static_cast<int>(geo.centers->size());
    } else if (geo.cluster_size != 1 && geo.cluster_size != 7) {
      r.fail(g, "geometry.cluster_size " + std::to_string(geo.cluster_size) +
                    " needs explicit 'centers' (only 1 and 7 are generated)");
    }
    if (const auto a = g["antennas"]) {
      const std::string actx = "geometry.antennas";
      r.check_keys(a, {"layout", "count", "radius", "rotation", "positions"}, actx);
      auto& spec = geo.antennas;
      const auto layout = r.get_or<std::string>(a, "layout", "symmetric_circle", actx);
      if (layout == "symmetric_circle") {
        spec.layout = AntennaLayoutKind::symmetric_circle;
        if (a["positions"]) r.fail(a["positions"], actx + ".positions requires layout: explicit");
        spec.count = r.get_or(a, "count", spec.count, actx);
        spec.radius = r.get_or(a, "radius", spec.radius, actx);
        spec.rotation = r.get_or(a, "rotation", spec.rotation, actx);
        if (spec.count < 1) r.fail(a, actx + ".count must be >= 1");
        if (!(spec.radius >= 0.0 && spec.radius <= 1.0)) r.fail(a, actx + ".radius must be in [0, 1]");
      } else if (layout == "explicit") {
        spec.layout = AntennaLayoutKind::explicit_list;
        for (const char* k : {"count", "radius", "rotation"})
          if (a[k]) r.fail(a[k], actx + "." + k + " is not used with layout: explicit");
        if (!a["positions"]) r.fail(a, actx + ": layout explicit requires 'positions'");
        spec.positions = detail::to_polar(detail::parse_points(r, a["positions"], actx + ".positions"));
        spec.count = static_cast<int>(spec.positions.size());
      } else {
        r.fail(a["layout"], actx + ".layout: expected symmetric_circle or explicit");
      }
    }
    if (g["users"]) {
      geo.users = detail::to_polar(detail::parse_points(r, g["users"], "geometry.users"));
      if (static_cast<int>(geo.users->size()) != geo.cluster_size)
        r.fail(g["users"], "geometry.users: need exactly one user per cell");
    }
    try {
      (void)cfg.layout();
      (void)cfg.antennas();
      if (geo.users) (void)UserVector(cfg.layout(), *geo.users);
    } catch (const ValidationError& e) {
      r.fail(g, std::string("geometry: ") + e.what());
    }
  }

  if (const auto run = root["run"]) {
    const std::string ctx = "run";
    r.check_keys(run,
                 {"seed", "samples", "threads", "mc_trials", "horizon", "warmup", "delay_convention",
                  "energy_mode", "flow", "thresholds", "radii", "activities", "optimizer", "output"},
                 ctx);
    auto& rs = cfg.run;
    rs.seed = r.get_or<std::uint64_t>(run, "seed", rs.seed, ctx);
    rs.samples = r.get_or<std::int64_t>(run, "samples", rs.samples, ctx);
    rs.threads = r.get_or(run, "threads", rs.threads, ctx);
    rs.mc_trials = r.get_or<std::int64_t>(run, "mc_trials", rs.mc_trials, ctx);
    rs.horizon = r.get_or<std::int64_t>(run, "horizon", rs.horizon, ctx);
    rs.warmup = r.get_or<std::int64_t>(run, "warmup", rs.warmup, ctx);
    if (rs.samples < 1) r.fail(run["samples"], "run.samples must be >= 1");
    if (rs.threads < 1) r.fail(run["threads"], "run.threads must be >= 1");
    if (rs.mc_trials < 1) r.fail(run["mc_trials"], "run.mc_trials must be >= 1");
    if (rs.warmup < 0 || rs.horizon <= rs.warmup) r.fail(run, "run: need horizon > warmup >= 0");
    if (run["delay_convention"]) {
      const auto c = r.scalar<std::string>(run["delay_convention"], "run.delay_convention");
      if (c == "sojourn")
        rs.delay_convention = DelayConvention::sojourn;
      else if (c == "waiting")
        rs.delay_convention = DelayConvention::waiting;
      else
        r.fail(run["delay_convention"], "run.delay_convention: expected sojourn or waiting");
    }
    if (run["energy_mode"]) {
      const auto m = r.scalar<std::string>(run["energy_mode"], "run.energy_mode");
      if (m == "auto")
        rs.energy_mode = EnergyModeSetting::automatic;
      else if (m == "gaussian")
        rs.energy_mode = EnergyModeSetting::gaussian;
      else if (m == "exact_poisson")
        rs.energy_mode = EnergyModeSetting::exact_poisson;
      else
        r.fail(run["energy_mode"], "run.energy_mode: expected auto, gaussian or exact_poisson");
    }
    if (run["flow"]) {
      rs.flow = r.scalar<int>(run["flow"], "run.flow");
      if (cfg.has_flows && (*rs.flow < 1 || *rs.flow > static_cast<int>(cfg.flows.size())))
        r.fail(run["flow"], "run.flow must name a priority between 1 and the number of flows");
    }
    if (run["thresholds"]) {
      rs.thresholds = detail::parse_range(r, run["thresholds"], "run.thresholds");
      if (rs.thresholds.from < 0.0) r.fail(run["thresholds"], "run.thresholds must be >= 0");
    }
    if (run["radii"]) {
      rs.radii = detail::parse_range(r, run["radii"], "run.radii");
      if (rs.radii.from < 0.0 || rs.radii.to > 1.0)
        r.fail(run["radii"], "run.radii must lie in [0, 1]");
    }
    if (const auto acts = run["activities"]) {
      if (!acts.IsSequence() || acts.size() == 0)
        r.fail(acts, "run.activities must be a non-empty list");
      for (std::size_t i = 0; i < acts.size(); ++i) {
        const double v = r.scalar<double>(acts[i], "run.activities");
        if (!(v >= 0.0 && v <= 1.0)) r.fail(acts[i], "run.activities entries must be in [0, 1]");
        rs.activities.push_back(v);
      }
    }
    if (run["optimizer"]) rs.optimizer = detail::parse_optimizer(r, run["optimizer"], "run.optimizer");
    rs.output = r.get_or<std::string>(run, "output", rs.output, ctx);
  }
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

namespace detail {

/// Shortest text that parses back to exactly `v`.
inline std::string exact(double v) {
  char buf[32];
  for (int digits = 9; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace detail

/// The `geometry.antennas` block for a layout, in config syntax.
inline std::string antenna_block(const AntennaVector& antennas) {
  std::ostringstream os;
  os << "antennas:\n  layout: explicit\n  positions:\n";
  for (const auto& p : antennas.positions())
    os << "    - [" << detail::exact(p.radius) << ", " << detail::exact(p.angle) << "]\n";
  return os.str();
}

/// A complete geometry section reproducing `cfg`'s cluster with new antennas.
inline std::string geometry_block(const ScenarioConfig& cfg, const AntennaVector& antennas) {
  std::ostringstream os;
  os << "geometry:\n";
  if (cfg.geometry.centers) {
    os << "  centers:\n";
    for (const auto& c : *cfg.geometry.centers)
      os << "    - [" << detail::exact(c.x) << ", " << detail::exact(c.y) << "]\n";
  } else {
    os << "  cluster_size: " << cfg.geometry.cluster_size << "\n";
  }
  os << "  spacing: " << detail::exact(cfg.geometry.spacing) << "\n";
  os << "  height: " << detail::exact(antennas.height()) << "\n";
  std::istringstream block(antenna_block(antennas));
  for (std::string line; std::getline(block, line);) os << "  " << line << "\n";
  return os.str();
}

}  // namespace dasqos::workbench
