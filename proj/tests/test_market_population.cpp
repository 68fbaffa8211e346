#include <catch_amalgamated.hpp>

#include <cmath>

#include "fwdrel/market_population.hpp"

using namespace fwdrel;
using Catch::Approx;

namespace {
AgentType ok_agent() {
  AgentType a;
  a.alpha = 2.0;
  a.theta = 0.5;
  a.lambda = 1.5;
  a.stock = {0.3, 0.1, 0.4};
  a.deltaZ = VolSchedule::constant(0.1, 0.2);
  return a;
}

bool has_field(const std::vector<Diagnostic>& d, const std::string& f) {
  for (const auto& x : d)
    if (x.field == f) return true;
  return false;
}
}  // namespace

TEST_CASE("piecewise constant schedules evaluate right-continuously") {
  PiecewiseConstant p{{1.0, 2.0}, {0.1, 0.2, 0.3}};
  REQUIRE(p.well_formed());
  CHECK(p(0.0) == 0.1);
  CHECK(p(0.999) == 0.1);
  CHECK(p(1.0) == 0.2);
  CHECK(p(5.0) == 0.3);
  CHECK_FALSE(PiecewiseConstant{{2.0, 1.0}, {0.0, 0.0, 0.0}}.well_formed());
  CHECK(VolSchedule::constant(0.3, 0.4).norm2(0.7) == Approx(0.25));
}

TEST_CASE("valid agent produces no diagnostics") { CHECK(validate_agent(ok_agent()).empty()); }

TEST_CASE("alpha inside the band around one is rejected") {
  AgentType a = ok_agent();
  a.alpha = 1.0;
  CHECK(has_field(validate_agent(a), "alpha"));
  a.alpha = 1.0 + 5e-10;
  CHECK(has_field(validate_agent(a), "alpha"));
  a.alpha = 1.0 + 1e-8;
  CHECK(validate_agent(a).empty());
  a.alpha = -0.5;
  CHECK(has_field(validate_agent(a), "alpha"));
}

TEST_CASE("out-of-range parameters are reported by field") {
  AgentType a = ok_agent();
  a.theta = 1.2;
  CHECK(has_field(validate_agent(a), "theta"));
  a = ok_agent();
  a.stock.nu = 0.0;
  a.stock.sigma = 0.0;
  CHECK(!validate_agent(a).empty());
  a = ok_agent();
  a.lambda = 0.5;
  CHECK(has_field(validate_agent(a), "lambda"));
  a = ok_agent();
  a.coupling.kind = CouplingKind::Proportional;
  a.coupling.K = 0.0;
  CHECK(!validate_agent(a).empty());
  a = ok_agent();
  a.coupling.kind = CouplingKind::Power;
  a.coupling.kappa = 0.3;
  CHECK(!validate_agent(a).empty());
  a = ok_agent();
  a.z0 = -1.0;
  CHECK(!validate_agent(a).empty());
}

TEST_CASE("validation is pure and several problems are all listed") {
  AgentType a = ok_agent();
  a.alpha = 1.0;
  a.theta = -0.1;
  const AgentType copy = a;
  const auto d1 = validate_agent(a), d2 = validate_agent(a);
  CHECK(d1.size() >= 2);
  CHECK(d1.size() == d2.size());
  CHECK(a.alpha == copy.alpha);
  CHECK(a.theta == copy.theta);
  CHECK_THROWS_AS(require_valid(a), InvalidInput);
}

TEST_CASE("populations must share lambda and kappa") {
  AgentType a = ok_agent(), b = ok_agent();
  b.lambda = 2.0;
  CHECK(!validate_population({a, b}).empty());
  a.coupling.kind = b.coupling.kind = CouplingKind::Power;
  a.coupling.kappa = -0.5;
  b.coupling.kappa = -0.7;
  b.lambda = a.lambda;
  CHECK(!validate_population({a, b}).empty());
  b.coupling.kappa = -0.5;
  CHECK(validate_population({a, b}).empty());
  CHECK(!validate_population({}).empty());
}

TEST_CASE("coupling kinds fix lambda and the initial field") {
  AgentType a = ok_agent();
  a.coupling.kind = CouplingKind::Proportional;
  a.coupling.K = 0.7;
  CHECK(effective_lambda(a) == 1.0);
  CHECK(initial_phi(a) == Approx(0.7 * a.z0));
  a.coupling.kind = CouplingKind::Power;
  a.coupling.kappa = -0.5;
  CHECK(effective_lambda(a) == 1.5);
  a.z0 = 4.0;
  CHECK(initial_phi(a) == Approx(std::pow(4.0, 1.5)));
}

TEST_CASE("population sampling is seeded and respects ranges") {
  PopulationSpec s;
  s.alpha = {0.5, 1.5};
  const auto p1 = sample_population(s, 500, 7), p2 = sample_population(s, 500, 7), p3 = sample_population(s, 500, 8);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    same &= p1[i].alpha == p2[i].alpha && p1[i].theta == p2[i].theta;
    differ |= p1[i].alpha != p3[i].alpha;
    CHECK(p1[i].alpha >= 0.5);
    CHECK(p1[i].alpha <= 1.5);
    CHECK(std::abs(p1[i].alpha - 1.0) >= kAlphaBand);
    CHECK(p1[i].theta >= 0.0);
    CHECK(p1[i].theta <= 1.0);
  }
  CHECK(same);
  CHECK(differ);
  const double Eth = population_expectation(p1, [](const AgentType& a) { return a.theta; });
  CHECK(Eth == Approx(0.5).margin(0.05));
}
