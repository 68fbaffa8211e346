#include <catch_amalgamated.hpp>

#include <cmath>

#include "fwdrel/meanfield_nash.hpp"

using namespace fwdrel;
using Catch::Approx;

namespace {
AgentType agent(double alpha, double theta, double deltaB = 0.5) {
  AgentType a;
  a.alpha = alpha;
  a.theta = theta;
  a.stock = {0.3, 0.0, 1.0};
  a.deltaZ = VolSchedule::constant(0.0, deltaB);
  return a;
}

AgentType power_agent(double alpha, double theta, double kappa, double deltaB) {
  AgentType a = agent(alpha, theta, deltaB);
  a.coupling.kind = CouplingKind::Power;
  a.coupling.kappa = kappa;
  return a;
}

std::vector<AgentType> random_population(std::size_t n, std::uint64_t seed, double lambda = 2.0) {
  PopulationSpec s;
  s.alpha = {0.3, 3.0};
  s.mu = {0.1, 0.5};
  s.nu = {0.0, 0.4};
  s.sigma = {0.2, 1.0};
  s.deltaZW = {0.0, 0.2};
  s.deltaZB = {0.0, 0.5};
  s.deltaPhiW = {0.0, 0.1};
  s.deltaPhiB = {0.0, 0.2};
  s.bPhiBar = {0.0, 0.1};
  s.logRatio0 = {-0.3, 0.3};
  s.lambda = lambda;
  return sample_population(s, n, seed);
}
}  // namespace

TEST_CASE("homogeneous mean-field portfolio") {
  const AgentType a = agent(2.0, 0.6);
  const MFEquilibrium e = mf_equilibrium({a}, 0.0);
  CHECK(e.psi == Approx(0.3).margin(1e-15));
  CHECK(e.varphi == Approx(0.4).margin(1e-15));
  CHECK(e.sigma_pi_bar == Approx(4.0 / 7.0).margin(1e-15));
  CHECK(mf_portfolio(a, e, 0.0) == Approx(4.0 / 7.0).margin(1e-15));
  CHECK(std::abs(a.stock.sigma * mf_portfolio(a, e, 0.0) - e.sigma_pi_bar) < 1e-12);
}

TEST_CASE("heterogeneous mean-field portfolio is self-consistent") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto pop = random_population(50, s);
    const MFEquilibrium e = mf_equilibrium(pop, 0.0);
    const double avg =
        population_expectation(pop, [&](const AgentType& a) { return a.stock.sigma * mf_portfolio(a, e, 0.0); });
    CHECK(std::abs(avg - e.sigma_pi_bar) < 1e-12);
  }
}

TEST_CASE("vanishing competition weight leaves the classical component") {
  AgentType a = agent(1.65, 1e-10);
  const MFEquilibrium e = mf_equilibrium({a, agent(2.5, 0.9)}, 0.0);
  const PortfolioSplit s = mf_portfolio_split(a, e, 0.0);
  CHECK(s.competitive + s.merton == Approx(mf_portfolio(a, e, 0.0)).epsilon(1e-15));
  // The competitive part is linear in theta and vanishes with it.
  AgentType half = a;
  half.theta = 0.5e-10;
  const double d1 = mf_portfolio(a, e, 0.0) - s.merton, d2 = mf_portfolio(half, e, 0.0) - s.merton;
  CHECK(d2 == Approx(0.5 * d1).epsilon(1e-4));
  AgentType zero = a;
  zero.theta = 0.0;
  CHECK(mf_portfolio(zero, e, 0.0) == Approx(s.merton).epsilon(1e-15));
}

TEST_CASE("competition coefficient and its sign") {
  CHECK(k_alpha_theta(2.0, 0.6, -0.3) == Approx(0.3 / 0.7).margin(1e-15));
  CHECK(k_alpha_theta(0.5, 0.0, 0.2) == 0.0);
  for (double al : {0.2, 0.7, 1.3, 2.9})
    for (double th : {0.1, 0.5, 1.0}) CHECK((k_alpha_theta(al, th, -0.3) > 0) == (al > 1.0));
  CHECK_THROWS_AS(k_alpha_theta(2.0, 0.5, -1.0), DegenerateEquilibrium);
}

TEST_CASE("proportional coupling consumption") {
  AgentType a = agent(0.5, 0.5);
  a.coupling.kind = CouplingKind::Proportional;
  a.coupling.K = 0.7;
  CHECK(proportional_consumption(a, {a}) == Approx(0.621533).margin(1e-6));
  AgentType hi = agent(2.0, 0.6), lo = hi;
  hi.coupling.kind = lo.coupling.kind = CouplingKind::Proportional;
  hi.coupling.K = 1.4;
  lo.coupling.K = 1.0 / 1.4;
  CHECK(proportional_consumption(hi, {hi, lo}) == Approx(std::sqrt(1.4)).epsilon(1e-14));
  CHECK_THROWS(proportional_consumption(hi, {agent(2.0, 0.6)}));
}

TEST_CASE("initial mean-field consumption") {
  AgentType a = agent(2.0, 0.5);
  a.phi0 = 1.4;
  CHECK(mf_consumption_initial(a, {a}) == Approx(1.25146).margin(1e-5));
}

TEST_CASE("log scheme and explicit representation of mean-field consumption agree") {
  const auto pop = random_population(20, 9);
  double prev = 0.0;
  for (std::size_t steps : {250u, 1000u, 4000u}) {
    const TimeGrid g{1.0, steps};
    const MFCoefficientTable tab = mf_coefficient_table(pop, g);
    double err = 0.0;
    for (std::size_t p = 0; p < 20; ++p) {
      const PathBundle b = generate_bundle(g, 1, 12, p);
      err += std::abs(mf_consumption_path(pop[3], pop, tab, b, 0).x.back() -
                      mf_consumption_explicit(pop[3], pop, tab, b, 0).x.back());
    }
    err /= 20;
    if (prev > 0.0) CHECK(err < 0.75 * prev);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("homogeneous particle simulation matches the consumption SDE") {
  // Representative agent: (Z, phi) integrated under the drift conditions with
  // the population aggregates equal to its own consumption. The average
  // consumption enters b^Z with weight (1 - alpha) theta and b^phi with
  // weight (1 - alpha) theta lambda.
  AgentType a = agent(2.0, 0.6, 0.3);
  a.lambda = 2.0;
  a.stock.nu = 0.2;
  a.coupling.bPhiBar = PiecewiseConstant::constant(0.05);
  a.coupling.deltaPhi = VolSchedule::constant(0.0, 0.1);
  a.phi0 = 1.2;
  const std::vector<AgentType> pop{a};
  const TimeGrid g{1.0, 2000};
  const MFCoefficientTable tab = mf_coefficient_table(pop, g);
  const MFEquilibrium e = mf_equilibrium(pop, 0.0);
  const double zb = mf_zbar(a, e, 0.0), m = e.m, dt = g.dt();
  double worst = 0.0;
  for (std::size_t p = 0; p < 10; ++p) {
    const PathBundle b = generate_bundle(g, 1, 40, p);
    const ProcessPath c = mf_consumption_path(a, pop, tab, b, 0);
    double lz = 0.0, lp = std::log(a.phi0);
    for (std::size_t k = 0; k < g.steps; ++k) {
      const double Y = std::exp((lp - lz) / a.alpha);
      const double cc = std::pow(Y, 1.0 / (1.0 + m));
      const double feed = a.alpha * consumption_multiplier(a.alpha, a.theta, cc) * Y;
      const double dB = b.dB(k), avg = (1.0 - a.alpha) * a.theta * cc;
      lz += (zb - avg - feed - 0.5 * 0.09) * dt + 0.3 * dB;
      lp += (0.05 - a.lambda * avg - a.lambda * feed - 0.5 * 0.01) * dt + 0.1 * dB;
    }
    const double cDirect = std::pow(std::exp((lp - lz) / a.alpha), 1.0 / (1.0 + m));
    worst = std::max(worst, std::abs(cDirect - c.x.back()) / cDirect);
  }
  CHECK(worst < 5e-3);
}

TEST_CASE("power coupling: general drift route equals the Ito-consistent coefficients") {
  const double kap = -0.5;
  std::vector<AgentType> pop;
  for (double ia : {1.5, 2.5})
    for (double th : {0.5, 0.9}) pop.push_back(power_agent(1.0 / ia, th, kap, 0.2 + 0.3 * th));
  const MFEquilibrium e = mf_equilibrium(pop, 0.0);
  const double abar = population_expectation(pop, [&](const AgentType& b) { return mf_ratio(b, e, 0.0).a; });
  const double vbar = population_expectation(pop, [&](const AgentType& b) { return mf_ratio(b, e, 0.0).volB; });
  for (const AgentType& a : pop) {
    const KappaCoefficients c = kappa_coefficients(a, pop, 0.0, KappaDrift::ItoConsistent);
    const double K = k_alpha_theta(a, pop);
    CHECK(c.bA == Approx(mf_ratio(a, e, 0.0).a + K * abar).margin(1e-12));
    CHECK(c.volB == Approx(mf_ratio(a, e, 0.0).volB + K * vbar).margin(1e-12));
  }
}

TEST_CASE("power coupling: direct Z simulation matches the Ito-consistent path") {
  const AgentType a = power_agent(2.0, 0.5, -1.0, 0.5);
  const std::vector<AgentType> pop{a};
  const TimeGrid g{2.0, 4000};
  const MFEquilibrium e = mf_equilibrium(pop, 0.0);
  const double zb = mf_zbar(a, e, 0.0), m = e.m, dt = g.dt(), kap = -1.0;
  double errIto = 0.0, errDisp = 0.0;
  for (std::size_t p = 0; p < 10; ++p) {
    const PathBundle b = generate_bundle(g, 1, 41, p);
    // phi = Z^(1 - kappa), hence Y = Z^(-kappa/alpha).
    double lz = 0.0;
    for (std::size_t k = 0; k < g.steps; ++k) {
      const double Y = std::exp(-kap * lz / a.alpha);
      const double cc = std::pow(Y, 1.0 / (1.0 + m));
      const double drift = zb - (1.0 - a.alpha) * a.theta * cc - a.alpha * consumption_multiplier(a.alpha, a.theta, cc) * Y;
      lz += (drift - 0.5 * 0.25) * dt + 0.5 * b.dB(k);
    }
    const double cDirect = std::pow(std::exp(-kap * lz / a.alpha), 1.0 / (1.0 + m));
    errIto += std::abs(power_consumption_path(a, pop, b, 0, 1.0, KappaDrift::ItoConsistent).x.back() - cDirect) / cDirect;
    errDisp += std::abs(power_consumption_path(a, pop, b, 0, 1.0, KappaDrift::Displayed).x.back() - cDirect) / cDirect;
  }
  CHECK(errIto / 10 < 5e-3);
  CHECK(errDisp > 10 * errIto);
}

TEST_CASE("Gamma parameters are consistent with the mean") {
  AgentType a = power_agent(2.0, 0.5, -1.0, 0.5);
  a.stock.mu = 1.5;
  const KappaCoefficients c = kappa_coefficients(a, {a});
  REQUIRE(c.q() < 0.0);
  CHECK(c.gamma_shape() * c.gamma_scale() == Approx(c.gamma_mean()).epsilon(1e-14));
  CHECK(stochastic_limit_level(c) == c.gamma_mean());
  const KappaCoefficients z = benchmark_coefficients(a, {a});
  CHECK(z.vol2() == 0.0);
  if (z.bA > 0.0) CHECK(benchmark_consumption(z, 1.0, 200.0) == Approx(z.gamma_mean()).epsilon(1e-6));
}

TEST_CASE("power consumption path stays positive over long horizons") {
  const AgentType a = power_agent(0.5, 0.5, -1.0, 0.5);
  const ProcessPath p = power_consumption_path(a, {a}, generate_bundle({200.0, 20000}, 1, 3, 0), 0, 1.0);
  for (double x : p.x) CHECK((x > 0.0 && std::isfinite(x)));
}

TEST_CASE("mean-field inputs are validated") {
  std::vector<AgentType> mixed{power_agent(2.0, 0.5, -1.0, 0.5), power_agent(2.0, 0.5, -0.5, 0.5)};
  CHECK_THROWS_AS(kappa_coefficients(mixed[0], mixed), InvalidInput);
  AgentType a = agent(2.0, 0.5), b = agent(2.0, 0.5);
  a.lambda = 1.0;
  b.lambda = 2.0;
  CHECK_THROWS_AS(mf_coefficient_table({a, b}, {1.0, 10}), InvalidInput);
  CHECK_THROWS(kappa_coefficients(agent(2.0, 0.5), {agent(2.0, 0.5)}));
  CHECK_THROWS(mf_equilibrium({}, 0.0));
}
