#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "dasqos/error.hpp"
#include "dasqos/outage_analysis.hpp"
#include "dasqos/partial_fractions.hpp"
#include "dasqos/rng.hpp"
#include "support/oracles.hpp"

using namespace dasqos;

namespace {

/// Two cells, one antenna straight above the target user so that
/// rho_0 = height and rho_1 = sqrt(height^2 + sep^2).
struct TwoCell {
  CellScenario sc;
  AntennaVector antennas;
  UserVector users;
};

TwoCell two_cell(double rho0, double rho1, double ple, double rate, double alpha = 1.0) {
  const double sep = std::sqrt(rho1 * rho1 - rho0 * rho0);
  ClusterLayout layout({{0, 0}, {sep, 0}}, sep);
  ChannelParams ch{ple, rate, alpha, 1.0};
  return {{layout, ch}, AntennaVector({{0.0, 0.0}}, rho0), UserVector(layout, {{0, 0}, {0, 0}})};
}

std::vector<double> random_rates(oracle::Gen& g, int F) {
  std::vector<double> r;
  for (int i = 0; i < F; ++i) r.push_back(std::pow(g.uniform(0.05, 4.0), g.pick<double>({2.0, 4.0})));
  return r;
}

struct RandomGeometry {
  CellScenario sc;
  AntennaVector antennas;
  UserVector users;
};

RandomGeometry random_geometry(oracle::Gen& g) {
  const int F = g.pick<int>({2, 3, 7});
  const double D = g.pick<double>({2.0, std::sqrt(3.0)});
  ClusterLayout layout = F == 7 ? hex_cluster(7, D) : [&] {
    std::vector<Point2> c{{0, 0}};
    for (int k = 1; k < F; ++k) c.push_back({D * std::cos(k * std::numbers::pi / 3), D * std::sin(k * std::numbers::pi / 3)});
    return ClusterLayout(c, D);
  }();
  ChannelParams ch{g.pick<double>({2.0, 4.0}), g.uniform(0.5, 2.0), 1.0, 1.0};
  auto rng = make_stream(static_cast<std::uint64_t>(g.integer(0, 1 << 30)));
  auto users = sample_user_vector(layout, rng);
  auto antennas = symmetric_circle(4, g.uniform(0, 1), g.uniform(0, 1), 0.05);
  return {{layout, ch}, antennas, users};
}

}  // namespace

TEST(ClosedForm, TwoCellReferenceCase) {
  const auto t = two_cell(1.0, 2.0, 4.0, 1.0);
  EXPECT_NEAR(antenna_outage_closed_form(t.sc, t.antennas, t.users, 0), 1.0 / 17.0, 1e-12);
  EXPECT_NEAR(antenna_outage_closed_form(t.sc, t.antennas, t.users, 0), 0.058824, 1e-6);
}

TEST(ClosedForm, EquidistantIsHalf) {
  const std::vector<double> rates{3.0, 3.0};
  EXPECT_NEAR(outage_from_rates(rates, 1.0), 0.5, 1e-15);
}

TEST(ClosedForm, TwoCellFormulaOnRandomTuples) {
  oracle::Gen g(41);
  for (int i = 0; i < 100; ++i) {
    const double rho0 = g.uniform(0.05, 2.0), rho1 = g.uniform(0.05, 3.0);
    const double ple = g.uniform(1.5, 5.0), R = g.uniform(0.2, 3.0);
    const double K = std::exp2(R) - 1.0;
    const double a0 = std::pow(rho0, ple), a1 = std::pow(rho1, ple);
    const std::vector<double> rates{a0, a1};
    EXPECT_NEAR(outage_from_rates(rates, K), K * a0 / (K * a0 + a1), 1e-12);
  }
}

TEST(ClosedForm, MatchesProductOracleForGeneralClusters) {
  oracle::Gen g(42);
  for (int i = 0; i < 500; ++i) {
    const int F = g.integer(2, 9);
    const auto rates = random_rates(g, F);
    const double K = std::exp2(g.uniform(0.2, 3.0)) - 1.0;
    double got;
    try {
      got = outage_from_rates(rates, K);
    } catch (const ClosedFormUnavailable&) {
      continue;
    }
    EXPECT_NEAR(got, oracle::outage_product_form(rates, K), 1e-9) << i;
  }
}

TEST(ClosedForm, NoInterferersMeansNoOutage) {
  const std::vector<double> rates{2.0};
  EXPECT_EQ(outage_from_rates(rates, 1.0), 0.0);
}

TEST(ClosedForm, RequiresFullActivity) {
  const auto t = two_cell(1.0, 2.0, 4.0, 1.0, 0.5);
  EXPECT_THROW(antenna_outage_closed_form(t.sc, t.antennas, t.users, 0), ClosedFormUnavailable);
}

TEST(ClosedForm, AgreesWithFadingMonteCarlo) {
  oracle::Gen g(43);
  for (int i = 0; i < 10; ++i) {
    const auto geo = random_geometry(g);
    const int m = g.integer(0, 3);
    const double closed = antenna_outage_closed_form(geo.sc, geo.antennas, geo.users, m);
    const auto mc = antenna_outage_mc_parallel(geo.sc, geo.antennas, geo.users, m, 200000, 7 + i, 1);
    EXPECT_NEAR(closed, mc.value, 3 * std::max(mc.std_error, 1.0 / 200000)) << i;
  }
}

TEST(PartialFractions, ReconstructsProductForm) {
  oracle::Gen g(44);
  for (int i = 0; i < 100; ++i) {
    const int F = g.integer(2, 8);
    const auto rates = random_rates(g, F);
    const double K = std::exp2(g.uniform(0.2, 3.0)) - 1.0;
    const auto pf = outage_expansion(rates, K);
    if (pf.ill_conditioned()) continue;
    EXPECT_EQ(pf.order(), F);
    EXPECT_LT(pf.poles()[0].location, 0.0);
    for (std::size_t n = 1; n < pf.poles().size(); ++n) EXPECT_GT(pf.poles()[n].location, 0.0);
    for (int k = 0; k < 20; ++k) {
      const std::complex<double> s(g.uniform(-0.5, 3.0), g.uniform(-3.0, 3.0));
      const auto want = pf.product_form(s);
      EXPECT_LE(std::abs(pf.evaluate(s) - want), 1e-9 * std::abs(want) + 1e-15) << i << " " << s;
    }
  }
}

TEST(PartialFractions, RepeatedPoles) {
  const std::vector<double> others{0.7, 0.7, 0.7, 2.0, 2.0, 5.0};
  const auto pf = PartialFractionExpansion::build(-1.3 * 0.343 * 4.0 * 5.0, -1.3, others);
  ASSERT_EQ(pf.poles().size(), 4u);
  EXPECT_EQ(pf.poles()[1].multiplicity, 3);
  EXPECT_EQ(pf.poles()[2].multiplicity, 2);
  EXPECT_EQ(pf.order(), 7);
  oracle::Gen g(45);
  for (int k = 0; k < 20; ++k) {
    const std::complex<double> s(g.uniform(0.0, 3.0), g.uniform(-3.0, 3.0));
    const auto want = pf.product_form(s);
    EXPECT_LE(std::abs(pf.evaluate(s) - want), 1e-9 * std::abs(want) + 1e-15);
  }
  // Identical interferers: the repeated-pole residues give the product form.
  const std::vector<double> rates{1.5, 4.0, 4.0, 4.0, 9.0, 9.0, 20.0};
  EXPECT_NEAR(outage_from_rates(rates, 1.0), oracle::outage_product_form(rates, 1.0), 1e-10);
}

TEST(PartialFractions, NearlyCoincidentPolesFallBackToMonteCarlo) {
  const std::vector<double> rates{1.0, 4.0, 4.0 * (1 + 1e-8), 9.0};
  EXPECT_TRUE(outage_expansion(rates, 1.0).ill_conditioned());
  EXPECT_THROW(outage_from_rates(rates, 1.0), ClosedFormUnavailable);
  auto rng = make_stream(46);
  const ChannelParams ch{4.0, 1.0, 1.0, 1.0};
  const auto o = outage_for_rates(std::span<const double>(rates), ch, OutageOptions{400000}, rng);
  EXPECT_EQ(o.method, OutageMethod::monte_carlo);
  EXPECT_NEAR(o.probability, oracle::outage_product_form(rates, 1.0), 4 * o.std_error);
}

TEST(MonteCarlo, SilentInterferersNeverCauseOutage) {
  const auto t = two_cell(1.0, 1.2, 4.0, 3.0, 0.0);
  auto rng = make_stream(47);
  const auto e = antenna_outage_mc(t.sc, t.antennas, t.users, 0, 10000, rng);
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.std_error, 0.0);
  for (int i = 0; i < 100; ++i)
    EXPECT_TRUE(std::isinf(instantaneous_sinr_sample(t.sc, t.antennas, t.users, 0, rng)));
}

TEST(MonteCarlo, TwoCellReference) {
  const auto t = two_cell(1.0, 2.0, 4.0, 1.0);
  const auto e = antenna_outage_mc_parallel(t.sc, t.antennas, t.users, 0, 1000000, 48, 1);
  EXPECT_NEAR(e.value, 1.0 / 17.0, 0.0008);
  const auto eq = two_cell(1.0, 1.0 + 1e-12, 4.0, 1.0);
  const auto half = antenna_outage_mc_parallel(eq.sc, eq.antennas, eq.users, 0, 400000, 49, 1);
  EXPECT_NEAR(half.value, 0.5, 4 * half.std_error);
}

TEST(MonteCarlo, ActivityScalesSingleInterfererOutage) {
  for (double alpha : {0.25, 0.5, 0.9}) {
    const auto t = two_cell(1.0, 1.6, 4.0, 1.0, alpha);
    const auto full = two_cell(1.0, 1.6, 4.0, 1.0, 1.0);
    const double closed = antenna_outage_closed_form(full.sc, full.antennas, full.users, 0);
    const auto mc = antenna_outage_mc_parallel(t.sc, t.antennas, t.users, 0, 400000, 50, 1);
    EXPECT_NEAR(mc.value, alpha * closed, 4 * mc.std_error) << alpha;
  }
}

TEST(MonteCarlo, ActivityOracleForGeneralClusters) {
  oracle::Gen g(51);
  for (int i = 0; i < 8; ++i) {
    const auto rates = random_rates(g, g.integer(3, 7));
    const ChannelParams ch{4.0, g.uniform(0.5, 2.0), g.uniform(0.2, 0.9), 1.0};
    auto rng = make_stream(52, i);
    const auto mc = outage_mc_from_rates(std::span<const double>(rates), ch, 200000, rng);
    EXPECT_NEAR(mc.value, oracle::outage_product_form(rates, ch.threshold(), ch.activity),
                4 * std::max(mc.std_error, 1e-5));
  }
}

TEST(MonteCarlo, ParallelIsDeterministicAcrossThreadCounts) {
  const auto t = two_cell(1.0, 1.5, 4.0, 1.0);
  const auto a = antenna_outage_mc_parallel(t.sc, t.antennas, t.users, 0, 300000, 53, 1);
  const auto b = antenna_outage_mc_parallel(t.sc, t.antennas, t.users, 0, 300000, 53, 3);
  EXPECT_EQ(a.value, b.value);
}

TEST(MonteCarlo, ReplayIsIdentical) {
  const auto t = two_cell(1.0, 1.5, 4.0, 1.0);
  auto r1 = make_stream(54);
  auto r2 = make_stream(54);
  for (int i = 0; i < 100; ++i)
    EXPECT_EQ(instantaneous_sinr_sample(t.sc, t.antennas, t.users, 0, r1),
              instantaneous_sinr_sample(t.sc, t.antennas, t.users, 0, r2));
}

TEST(OutageProperties, NondecreasingInThreshold) {
  oracle::Gen g(55);
  for (int i = 0; i < 50; ++i) {
    const auto rates = random_rates(g, g.integer(2, 7));
    double prev = 0.0;
    for (double R = 0.1; R <= 4.0; R += 0.1) {
      double v;
      try {
        v = outage_from_rates(rates, std::exp2(R) - 1.0);
      } catch (const ClosedFormUnavailable&) {
        break;
      }
      EXPECT_GE(v, prev - 1e-12);
      prev = v;
    }
  }
}

TEST(OutageProperties, MovingTowardTargetNeverHurts) {
  oracle::Gen g(56);
  for (int i = 0; i < 200; ++i) {
    const auto geo = random_geometry(g);
    const int m = g.integer(0, 3);
    const auto& a = geo.antennas[m];
    const Point2 ant = geo.antennas.ground(m);
    const Point2 user = geo.users.position(0);
    std::vector<double> rates;
    path_gain_rates(geo.users.positions(), a, geo.antennas.height(),
                            geo.sc.channel.path_loss_exponent, rates);
    const double before = outage_from_rates(rates, geo.sc.channel.threshold());
    const double t = 0.2;
    const Point2 moved{ant.x + t * (user.x - ant.x), ant.y + t * (user.y - ant.y)};
    const PolarPosition p{std::hypot(moved.x, moved.y), std::atan2(moved.y, moved.x)};
    // Only the target distance changes in this one-dimensional check.
    std::vector<double> after_rates = rates;
    after_rates[0] = std::pow(antenna_distance(user, p, geo.antennas.height()), geo.sc.channel.path_loss_exponent);
    const double after = outage_from_rates(after_rates, geo.sc.channel.threshold());
    EXPECT_LE(after, before + 1e-12) << i;
  }
}

TEST(SystemOutage, Products) {
  const std::vector<double> a{0.1, 0.2, 0.3};
  EXPECT_NEAR(system_outage(a), 0.006, 1e-17);
  const std::vector<double> z{0.4, 0.0, 0.9};
  EXPECT_EQ(system_outage(z), 0.0);
  const std::vector<double> one{0.37};
  EXPECT_EQ(system_outage(one), 0.37);
  const std::vector<double> bad{0.5, 1.2};
  EXPECT_THROW(system_outage(bad), ValidationError);
}

TEST(ExpectedOutage, DeterministicAcrossThreadCounts) {
  const CellScenario sc{hex_cluster(7, 2.0), ChannelParams{2.0, 1.0, 1.0, 1.0}};
  const auto a = symmetric_circle(4, 0.5, 0.0, 0.05);
  const auto one = expected_outage(sc, a, {3000, 9, 1, 500});
  const auto four = expected_outage(sc, a, {3000, 9, 4, 500});
  EXPECT_EQ(one.estimate.value, four.estimate.value);
  EXPECT_EQ(one.estimate.std_error, four.estimate.std_error);
  EXPECT_EQ(one.estimate.samples, 3000);
  EXPECT_GT(one.estimate.value, 0.0);
  EXPECT_LT(one.estimate.value, 1.0);
}

TEST(ExpectedOutage, SilentNeighborsGiveZero) {
  const CellScenario sc{hex_cluster(7, 2.0), ChannelParams{2.0, 1.0, 0.0, 1.0}};
  const auto e = expected_outage(sc, symmetric_circle(4, 0.4, 0.0, 0.05), {500, 1, 1, 200});
  EXPECT_EQ(e.estimate.value, 0.0);
}

TEST(ExpectedOutage, PartialActivityMatchesOracleAverage) {
  const CellScenario sc{hex_cluster(7, 2.0), ChannelParams{2.0, 1.0, 0.5, 1.0}};
  const auto a = symmetric_circle(4, 0.4, 0.0, 0.05);
  const auto mc = expected_outage(sc, a, {400, 3, 1, 4000});
  // Same user draws, antenna outage from the activity oracle.
  auto user_rng = make_stream(3, 0);
  double sum = 0.0;
  std::vector<double> rates;
  for (int s = 0; s < 256; ++s) {
    const auto users = sample_user_vector(sc.layout, user_rng);
    double p = 1.0;
    for (int m = 0; m < 4; ++m) {
      path_gain_rates(users.positions(), a[m], a.height(), 2.0, rates);
      p *= oracle::outage_product_form(rates, 1.0, 0.5);
    }
    sum += p;
  }
  auto user_rng2 = make_stream(3, 2);
  for (int s = 0; s < 144; ++s) {
    const auto users = sample_user_vector(sc.layout, user_rng2);
    double p = 1.0;
    for (int m = 0; m < 4; ++m) {
      path_gain_rates(users.positions(), a[m], a.height(), 2.0, rates);
      p *= oracle::outage_product_form(rates, 1.0, 0.5);
    }
    sum += p;
  }
  EXPECT_NEAR(mc.estimate.value, sum / 400.0, 0.1 * sum / 400.0);
}
