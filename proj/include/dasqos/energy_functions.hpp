#pragma once

// Energy functions (asymptotic log moment generating functions) of counting
// processes. The renewal form uses the Gaussian limit of the renewal count:
// mean t/mu, variance sigma^2 t / mu^3.

#include <algorithm>
#include <cmath>
#include <variant>

#include "dasqos/error.hpp"
#include "dasqos/traffic_models.hpp"

namespace dasqos {

enum class Direction { arrival, service };

struct ExactPoisson {
  double rate = 0.0;
};

/// Bernoulli-per-slot counting process; q is the failure probability.
struct ExactBinomial {
  double q = 0.0;
};

struct AsymptoticRenewal {
  double mean = 1.0;
  double variance = 0.0;
};

class EnergyFunction {
public:
  using Kind = std::variant<ExactPoisson, ExactBinomial, AsymptoticRenewal>;

  EnergyFunction(Kind kind, Direction direction) : kind_(kind), direction_(direction) {}

  double operator()(double phi) const {
    return std::visit(
        [phi](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, ExactPoisson>) {
            return k.rate * std::expm1(phi);
          } else if constexpr (std::is_same_v<T, ExactBinomial>) {
            return std::log(k.q + (1.0 - k.q) * std::exp(phi));
          } else {
            return phi / k.mean + phi * phi * k.variance / (2.0 * k.mean * k.mean * k.mean);
          }
        },
        kind_);
  }

  bool is_exact() const { return !std::holds_alternative<AsymptoticRenewal>(kind_); }
  Direction direction() const { return direction_; }
  const Kind& kind() const { return kind_; }

private:
  Kind kind_;
  Direction direction_;
};

inline double eval_energy(const EnergyFunction& f, double phi) { return f(phi); }

inline EnergyFunction asymptotic_energy(Moments m, Direction d) {
  return {AsymptoticRenewal{m.mean, m.variance}, d};
}

/// Poisson arrivals use their exact energy; everything else the renewal limit.
inline EnergyFunction arrival_energy(const ArrivalModel& a) {
  if (const auto* p = std::get_if<Poisson>(&a))
    return {ExactPoisson{p->rate}, Direction::arrival};
  return asymptotic_energy(arrival_moments(a), Direction::arrival);
}

/// Renewal limit of the saturated departure process.
inline EnergyFunction service_energy(const ServiceModel& s) {
  return asymptotic_energy(service_moments(s), Direction::service);
}

/// Max relative deviation between exact and renewal-limit energy of a
/// Binomial process over a uniform grid on (0, phi_max].
inline double binomial_energy_gap(double q, double phi_max, int grid_points = 1000) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("binomial gap: q must be in (0, 1)");
  if (!(phi_max > 0.0)) throw ValidationError("binomial gap: phi_max must be positive");
  if (grid_points < 1) throw ValidationError("binomial gap: need at least one grid point");
  const EnergyFunction exact{ExactBinomial{q}, Direction::service};
  // Geometric renewal interval of a Bernoulli(1-q) success process.
  const EnergyFunction asym{AsymptoticRenewal{1.0 / (1.0 - q), q / ((1.0 - q) * (1.0 - q))},
                            Direction::service};
  double worst = 0.0;
  for (int k = 1; k <= grid_points; ++k) {
    const double phi = phi_max * k / grid_points;
    const double e = exact(phi);
    worst = std::max(worst, std::abs(asym(phi) - e) / e);
  }
  return worst;
}

}  // namespace dasqos
