#include <catch_amalgamated.hpp>

#include <cmath>

#include "fwdrel/crra_core.hpp"

using namespace fwdrel;
using Catch::Approx;

namespace {
AgentType agent(double alpha, double theta) {
  AgentType a;
  a.alpha = alpha;
  a.theta = theta;
  a.stock = {0.3, 0.0, 1.0};
  a.deltaZ = VolSchedule::constant(0.0, 0.5);
  return a;
}

// Free-coupling agent with both noises active in Z and phi.
AgentType field_agent() {
  AgentType a;
  a.alpha = 2.0;
  a.theta = 0.6;
  a.lambda = 2.0;
  a.stock = {0.2, 0.2, 0.3};
  a.deltaZ = VolSchedule::constant(0.1, 0.2);
  a.coupling.bPhiBar = PiecewiseConstant::constant(0.05);
  a.coupling.deltaPhi = VolSchedule::constant(0.05, 0.1);
  a.phi0 = 1.3;
  return a;
}
}  // namespace

TEST_CASE("f and g terms for a two-player example") {
  CompetitorAggregates g{0.2, 0.0, 0.2, 0.04, 0.0, 1.0};
  const FGTerms t = f_g_terms(1.0, g, 2);
  CHECK(t.f == Approx(-0.16).margin(1e-15));
  CHECK(t.g == Approx(0.04).margin(1e-15));
  CHECK_THROWS(f_g_terms(1.0, g, 1));
}

TEST_CASE("zbar drift from literal competition terms") {
  // (1-2) (0.25*0.6*0.5 + 0.16 + (0.04 - 0.25) - 0.6*0.3) = 0.155
  AgentType a = agent(2.0, 0.6);
  a.deltaZ = VolSchedule::constant(0.0, 0.25);
  a.stock = {0.3, 0.0, 1.0};
  const double piStar = 0.5;  // Sigma pi^2 = 0.25
  CHECK(zbar_from_terms(a, 0.0, 0.5, {-0.16, 0.04}, 0.3, piStar) == Approx(0.155).margin(1e-14));
}

TEST_CASE("zbar drift reduces to the classical term without competition") {
  AgentType a = agent(3.0, 0.0);
  a.deltaZ = VolSchedule::constant(0.0, 0.0);
  a.stock = {0.3, 0.2, 0.4};
  const double pi = 0.7;
  const double expect = (1.0 - 3.0) * (-0.5 * 3.0 * a.stock.Sigma() * pi * pi);
  CHECK(zbar_drift(a, 0.0, CompetitorAggregates::homogeneous(a.stock, 0.3, 0.1), 4, pi) == Approx(expect));
  AgentType z = agent(2.0, 0.0);
  z.deltaZ = {};
  CHECK(zbar_drift(z, 0.0, CompetitorAggregates{0, 0, 0, 0, 0, 1}, 3, 0.0) == 0.0);
}

TEST_CASE("best-response portfolio without competition") {
  CHECK(best_response_portfolio(agent(2.0, 0.0), 0.0, 123.0) == Approx(0.4).margin(1e-15));
  AgentType m = agent(2.5, 0.0);
  m.deltaZ = {};
  m.stock = {0.3, 0.2, 0.4};
  CHECK(best_response_portfolio(m, 0.0, 0.0) == Approx(0.3 / (2.5 * m.stock.Sigma())).epsilon(1e-15));
}

TEST_CASE("best-response consumption and the Z drift condition") {
  CHECK(best_response_consumption(agent(2.0, 0.6), 0.8, 0.5) == Approx(std::pow(0.8, 0.3) * 0.5).margin(1e-15));
  CHECK(best_response_consumption(agent(2.0, 0.6), 0.8, 0.5) == Approx(0.467624).margin(1e-6));
  CHECK(consistency_drift_Z(agent(2.0, 0.6), 0.1, 1.0, 0.5) == Approx(-0.9).margin(1e-15));
  CHECK_THROWS(consumption_multiplier(2.0, 0.6, 0.0));
}

TEST_CASE("logistic explicit solution matches the ODE closed form") {
  const double Y0 = 0.5, b = 0.3, rho = 0.4;
  LogisticCoefficients c{[=](double) { return b; }, [](double) { return 0.0; }, [](double) { return 0.0; },
                         [=](double) { return rho; }};
  const PathBundle bundle = generate_bundle({1.0, 10000}, 1, 1, 0);
  const ProcessPath p = logistic_explicit(Y0, c, bundle, 0);
  double worst = 0.0;
  for (std::size_t k = 0; k < p.t.size(); ++k)
    worst = std::max(worst, std::abs(p.x[k] - logistic_ode_closed_form(Y0, b, rho, p.t[k])));
  CHECK(worst < 1e-6);
  CHECK(logistic_ode_closed_form(2.0, 0.0, 0.5, 2.0) == Approx(1.0 / (0.5 + 1.0)));
}

TEST_CASE("logistic with rho = 0 is a stochastic exponential") {
  const double b = 0.1, w = 0.3, s = 0.2;
  LogisticCoefficients c{[=](double) { return b; }, [=](double) { return w; }, [=](double) { return s; },
                         [](double) { return 0.0; }};
  const PathBundle bundle = generate_bundle({1.0, 100}, 1, 4, 0);
  const ProcessPath p = logistic_explicit(1.2, c, bundle, 0);
  const double exact =
      1.2 * std::exp((b - 0.5 * (w * w + s * s)) + w * bundle.idio[0].values.back() + s * bundle.common.values.back());
  CHECK(p.x.back() == Approx(exact).epsilon(1e-12));
  const ProcessPath e = logistic_log_euler(1.2, c, bundle, 0);
  CHECK(e.x.back() == Approx(exact).epsilon(1e-12));
}

TEST_CASE("logistic path stays below the rho = 0 envelope") {
  LogisticCoefficients c{[](double) { return 0.2; }, [](double) { return 0.3; }, [](double) { return 0.2; },
                         [](double) { return 0.7; }};
  LogisticCoefficients free = c;
  free.rho = [](double) { return 0.0; };
  const PathBundle bundle = generate_bundle({2.0, 400}, 1, 8, 0);
  const ProcessPath p = logistic_explicit(1.0, c, bundle, 0), q = logistic_explicit(1.0, free, bundle, 0);
  for (std::size_t k = 0; k < p.x.size(); ++k) CHECK(p.x[k] <= q.x[k] * (1 + 1e-14));
}

TEST_CASE("ratio dynamics agree with separately simulated Z and phi") {
  const AgentType a = field_agent();
  auto zbar = [](double) { return 0.12; };
  auto cTilde = [](double t) { return 0.2 + 0.05 * t; };
  double errOurs = 0.0, errAlpha = 0.0;
  const std::size_t paths = 50;
  for (std::size_t p = 0; p < paths; ++p) {
    const PathBundle b = generate_bundle({1.0, 4000}, 1, 31, p);
    const FieldPaths f = simulate_fields(a, zbar, cTilde, b, 0);
    const double Ydirect = std::pow(f.phi.x.back() / f.Z.x.back(), 1.0 / a.alpha);
    errOurs += std::abs(logistic_explicit_Y(a, zbar, cTilde, b, 0).x.back() - Ydirect);
    // Alternative quadratic coefficient carrying an extra factor alpha.
    LogisticCoefficients alt = best_response_logistic(a, zbar, cTilde);
    const auto rho = alt.rho;
    alt.rho = [rho, al = a.alpha](double t) { return al * rho(t); };
    errAlpha += std::abs(logistic_explicit(std::pow(a.phi0 / a.z0, 0.5), alt, b, 0).x.back() - Ydirect);
  }
  errOurs /= paths;
  errAlpha /= paths;
  CHECK(errOurs < 2e-3);
  CHECK(errOurs < 0.1 * errAlpha);
}

TEST_CASE("linear representation of Z matches direct simulation") {
  const AgentType a = field_agent();
  auto zbar = [](double) { return 0.12; };
  auto cTilde = [](double) { return 0.25; };
  const PathBundle b = generate_bundle({1.0, 4000}, 1, 17, 0);
  const FieldPaths f = simulate_fields(a, zbar, cTilde, b, 0);
  const ProcessPath Z = linear_representation_Z(a, zbar, f.phi, cTilde, b, 0);
  for (std::size_t k = 0; k < Z.x.size(); k += 500) {
    REQUIRE(std::isfinite(Z.x[k]));
    CHECK(Z.x[k] == Approx(f.Z.x[k]).epsilon(5e-3));
  }
}

TEST_CASE("best-response logistic rejects invalid agents") {
  AgentType a = field_agent();
  a.lambda = 0.5;
  CHECK_THROWS_AS(best_response_logistic(a, [](double) { return 0.0; }, [](double) { return 1.0; }), InvalidInput);
}
