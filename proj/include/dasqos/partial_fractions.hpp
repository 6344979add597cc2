#pragma once

// Partial-fraction expansion of a rational Laplace transform with real poles,
//
//   Z(s) = H * prod_n (s + c_n)^(-k_n) = H * sum_n sum_{j=1..k_n} b_n^j / (s + c_n)^j,
//
// used to invert the transform of K*Y - X_0 in the outage computation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "dasqos/error.hpp"

namespace dasqos {

struct PoleTerm {
  double location = 0.0;  // c, the factor is (s + c)
  int multiplicity = 1;
  std::vector<double> coefficients;  // b^1 .. b^k
};

class PartialFractionExpansion {
public:
  /// Poles within `merge_tol` (relative) are treated as one repeated pole.
  /// Distinct poles closer than `separation_tol` (relative) mark the
  /// expansion ill-conditioned: residues then cancel catastrophically.
  static PartialFractionExpansion build(double scale, double target, std::span<const double> others,
                                        double merge_tol = 1e-9, double separation_tol = 1e-6) {
    PartialFractionExpansion pf;
    pf.scale_ = scale;
    pf.poles_.push_back({target, 1, {}});

    std::vector<double> sorted(others.begin(), others.end());
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i + 1;
      double sum = sorted[i];
      while (j < sorted.size() &&
             std::abs(sorted[j] - sorted[i]) <=
                 merge_tol * std::max(std::abs(sorted[j]), std::abs(sorted[i]))) {
        sum += sorted[j];
        ++j;
      }
      const int k = static_cast<int>(j - i);
      pf.poles_.push_back({sum / k, k, {}});
      i = j;
    }
    for (std::size_t a = 0; a < pf.poles_.size(); ++a)
      for (std::size_t b = a + 1; b < pf.poles_.size(); ++b) {
        const double ca = pf.poles_[a].location;
        const double cb = pf.poles_[b].location;
        if (std::abs(ca - cb) <= separation_tol * std::max(std::abs(ca), std::abs(cb)))
          pf.ill_conditioned_ = true;
        if (ca == cb) throw ClosedFormUnavailable("partial fractions: coincident distinct poles");
      }
    for (std::size_t n = 0; n < pf.poles_.size(); ++n) pf.compute_coefficients(n);
    return pf;
  }

  double scale() const { return scale_; }
  const std::vector<PoleTerm>& poles() const { return poles_; }
  bool ill_conditioned() const { return ill_conditioned_; }
  int order() const {
    int s = 0;
    for (const auto& p : poles_) s += p.multiplicity;
    return s;
  }

  /// H * sum b/(s+c)^j.
  std::complex<double> evaluate(std::complex<double> s) const {
    std::complex<double> acc = 0.0;
    for (const auto& p : poles_) {
      const std::complex<double> inv = 1.0 / (s + p.location);
      std::complex<double> pw = inv;
      for (double b : p.coefficients) {
        acc += b * pw;
        pw *= inv;
      }
    }
    return scale_ * acc;
  }

  /// H * prod (s+c)^(-k), the unexpanded form.
  std::complex<double> product_form(std::complex<double> s) const {
    std::complex<double> acc = scale_;
    for (const auto& p : poles_) acc /= std::pow(s + p.location, p.multiplicity);
    return acc;
  }

  /// Mass of the inverse transform on x > 0: H * sum over the positive-side
  /// poles (every pole but the first) of b^j / c^j.
  double right_tail_mass() const {
    double acc = 0.0;
    for (std::size_t n = 1; n < poles_.size(); ++n) {
      const auto& p = poles_[n];
      const double inv = 1.0 / p.location;
      double pw = inv;
      for (double b : p.coefficients) {
        acc += b * pw;
        pw *= inv;
      }
    }
    return scale_ * acc;
  }

private:
  // b^j = g^(k-j)(-c) / (k-j)!, g(s) = prod_{l != n} (s + c_l)^(-k_l). Derivatives
  // of g follow from g' = g h with h = (log g)' = -sum k_l / (s + c_l).
  void compute_coefficients(std::size_t n) {
    auto& target = poles_[n];
    const int k = target.multiplicity;
    std::vector<double> h(k, 0.0);  // h^(r)(s0) for r < k
    double g0 = 1.0;
    for (std::size_t l = 0; l < poles_.size(); ++l) {
      if (l == n) continue;
      const double d = poles_[l].location - target.location;
      const int kl = poles_[l].multiplicity;
      g0 /= std::pow(d, kl);
      double fact = 1.0;
      double dpow = d;
      for (int r = 0; r < k; ++r) {
        if (r > 0) fact *= r;
        const double sign = (r % 2 == 0) ? -1.0 : 1.0;
        h[r] += sign * kl * fact / dpow;
        dpow *= d;
      }
    }
    std::vector<double> g(k, 0.0);
    g[0] = g0;
    for (int m = 1; m < k; ++m) {
      double acc = 0.0;
      double binom = 1.0;  // C(m-1, r)
      for (int r = 0; r <= m - 1; ++r) {
        acc += binom * h[r] * g[m - 1 - r];
        binom = binom * (m - 1 - r) / (r + 1);
      }
      g[m] = acc;
    }
    target.coefficients.assign(k, 0.0);
    double fact = 1.0;
    for (int order = 0; order < k; ++order) {
      if (order > 0) fact *= order;
      target.coefficients[k - 1 - order] = g[order] / fact;  // j = k - order
    }
  }

  double scale_ = 1.0;
  std::vector<PoleTerm> poles_;
  bool ill_conditioned_ = false;
};

}  // namespace dasqos
