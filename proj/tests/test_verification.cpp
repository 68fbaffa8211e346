#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fwdrel/suite.hpp"
#include "fwdrel/verification.hpp"

using namespace fwdrel;
using Catch::Approx;

TEST_CASE("Gamma CDF and Kolmogorov tail reference values") {
  CHECK(gamma_cdf(1.0, 1.0, 1.0) == Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(gamma_cdf(-1.0, 2.0, 1.0) == 0.0);
  CHECK(kolmogorov_tail(1.36) == Approx(0.0494).margin(5e-4));
  CHECK(kolmogorov_tail(0.0) == 1.0);
}

TEST_CASE("KS test accepts Gamma samples and rejects a wrong law") {
  std::mt19937_64 gen(5);
  std::gamma_distribution<double> g(3.0, 0.5);
  std::vector<double> x(5000);
  for (double& v : x) v = g(gen);
  const KSResult ok = ks_gamma_test(x, 3.0, 0.5);
  CHECK(ok.report.verdict == Verdict::Pass);
  CHECK(ok.pValue > 0.001);
  const KSResult bad = ks_gamma_test(x, 3.0, 0.8);
  CHECK(bad.report.verdict == Verdict::Fail);
  CHECK_THROWS(ks_gamma_test({}, 1.0, 1.0));
}

TEST_CASE("fitted order recovers an exact power law") {
  std::vector<ConvergenceRow> rows;
  for (double dt : {0.1, 0.05, 0.025, 0.0125}) rows.push_back({dt, 3.0 * std::pow(dt, 0.75), 0.0});
  CHECK(fitted_order(rows) == Approx(0.75).epsilon(1e-12));
}

TEST_CASE("logistic convergence study on a reduced grid") {
  LogisticScenario s = default_logistic_scenario(1);
  s.paths = 30;
  s.halvings = 3;
  const ConvergenceTable t = explicit_vs_euler(s);
  CHECK(t.rows.size() == 4);
  CHECK(t.order >= 0.5);
  CHECK(t.report.verdict == Verdict::Pass);
  CHECK(logistic_ode_check(0.5, 0.3, 0.4, 1.0, 1e-4).verdict == Verdict::Pass);
}

TEST_CASE("martingale property without competition") {
  BestResponseScenario s = default_martingale_scenario(3);
  s.agent.theta = 0.0;
  s.agent.deltaZ = {};
  s.grid = {1.0, 200};
  s.paths = 2000;
  const ResidualReport r = martingale_residual(s, {});
  CHECK(r.verdict == Verdict::Pass);
  CHECK(std::abs(r.statistic) <= 3.0 * r.stderr_);
}

TEST_CASE("zero horizon gives a zero martingale residual") {
  BestResponseScenario s = default_martingale_scenario(3);
  s.grid = {0.0, 0};
  s.paths = 10;
  CHECK(martingale_residual(s, {}).statistic == 0.0);
}

TEST_CASE("scenarios outside the covered cases are skipped") {
  BestResponseScenario s = default_martingale_scenario(3);
  s.agent.lambda = 1.0;
  s.paths = 10;
  const ResidualReport r = martingale_residual(s, {});
  CHECK(r.verdict == Verdict::Skipped);
  CHECK(!r.note.empty());
}

TEST_CASE("martingale statistic does not depend on the thread count") {
  BestResponseScenario s = default_martingale_scenario(3);
  s.grid = {1.0, 100};
  s.paths = 400;
  s.threads = 1;
  const ResidualReport a = martingale_residual(s, {0.5, 1.0});
  s.threads = 3;
  const ResidualReport b = martingale_residual(s, {0.5, 1.0});
  CHECK(a.statistic == b.statistic);
  CHECK(a.stderr_ == b.stderr_);
}

TEST_CASE("extinction fractions grow with the threshold and start at zero") {
  PowerScenario s = default_extinction_scenario(2);
  s.paths = 200;
  const ExtinctionReport lo = extinction_probe(s, {0.0, 25.0}, 1e-4), hi = extinction_probe(s, {0.0, 25.0}, 1e-2);
  CHECK(lo.fractions[0] == 0.0);
  CHECK(lo.fractions[1] <= hi.fractions[1]);
  CHECK(lo.coefficients.q() > 0.0);
  CHECK_THROWS(extinction_probe(s, {25.005}, 1e-3));
}

TEST_CASE("Gamma scenario lies in the q < 0 region") {
  const PowerScenario s = default_gamma_scenario(1);
  const KappaCoefficients c = kappa_coefficients(s.agent, s.population, 0.0, s.drift);
  CHECK(c.q() < 0.0);
  CHECK(s.c0 == c.gamma_mean());
}

TEST_CASE("small compatibility run stays within tolerance") {
  NestedScenario s = default_compatibility_scenario(4);
  s.outer = 10;
  s.inner = 100;
  const CompatibilityReport r = compatibility_residual(s);
  CHECK(r.consumption.statistic < 0.05);
  CHECK(r.wealth.statistic < 0.05);
}

TEST_CASE("derived seeds differ by tag") {
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
}
