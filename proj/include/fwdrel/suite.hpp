#pragma once
// Canonical verification scenarios shared by the CLI and the test suites.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fwdrel/figures.hpp"
#include "fwdrel/meanfield_nash.hpp"
#include "fwdrel/verification.hpp"

namespace fwdrel {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Independent seed for a named check of a run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) { return splitmix64(seed ^ fnv1a64(tag)); }

inline BestResponseScenario default_martingale_scenario(std::uint64_t seed) {
  BestResponseScenario s;
  s.id = "martingale";
  AgentType& a = s.agent;
  a.alpha = 2.0;
  a.theta = 0.6;
  a.lambda = 2.0;
  a.stock = {0.2, 0.2, 0.3};
  a.deltaZ = VolSchedule::constant(0.1, 0.2);
  a.coupling.kind = CouplingKind::Free;
  a.coupling.bPhiBar = PiecewiseConstant::constant(0.05);
  a.coupling.deltaPhi = VolSchedule::constant(0.05, 0.1);
  s.n = 5;
  s.competitorStock = a.stock;
  s.competitorPi = 0.5;
  s.competitorC = 0.2;
  s.grid = {1.0, 1000};
  s.paths = 10000;
  s.seed = derive_seed(seed, "martingale");
  return s;
}

inline std::vector<Strategy> default_perturbations() { return {{0.5, 1.0}, {-0.5, 1.0}, {0.0, 1.5}, {0.0, 0.5}}; }

inline PopulationSpec default_compatibility_population() {
  PopulationSpec p;
  p.alpha = {1.2, 3.0};
  p.theta = {0.0, 1.0};
  p.mu = {0.1, 0.4};
  p.nu = {0.1, 0.3};
  p.sigma = {0.2, 0.5};
  p.deltaZW = {0.0, 0.1};
  p.deltaZB = {0.0, 0.2};
  p.deltaPhiW = {0.0, 0.1};
  p.deltaPhiB = {0.0, 0.2};
  p.bPhiBar = {0.0, 0.1};
  p.logRatio0 = {-0.2, 0.2};
  p.lambda = 2.0;
  return p;
}

inline NestedScenario default_compatibility_scenario(std::uint64_t seed) {
  NestedScenario s;
  s.id = "compatibility";
  s.types = sample_population(default_compatibility_population(), 200, derive_seed(seed, "compatibility.types"));
  s.grid = {1.0, 200};
  s.outer = 100;
  s.inner = 200;
  s.seed = derive_seed(seed, "compatibility");
  return s;
}

inline LogisticScenario default_logistic_scenario(std::uint64_t seed) {
  LogisticScenario s;
  s.id = "logistic";
  s.seed = derive_seed(seed, "logistic");
  return s;
}

inline PowerScenario power_scenario(const std::string& id, double alpha, double theta, double mu, double deltaB,
                                    double kappa, const TimeGrid& grid, std::size_t paths, std::uint64_t seed) {
  PowerScenario s;
  s.id = id;
  AgentType& a = s.agent;
  a.alpha = alpha;
  a.theta = theta;
  a.stock = {mu, 0.0, 1.0};
  a.deltaZ = VolSchedule::constant(0.0, deltaB);
  a.coupling.kind = CouplingKind::Power;
  a.coupling.kappa = kappa;
  s.population = {a};
  s.grid = grid;
  s.paths = paths;
  s.seed = seed;
  return s;
}

// q < 0: Gamma long-run law. Starts at the stationary mean.
inline PowerScenario default_gamma_scenario(std::uint64_t seed) {
  PowerScenario s = power_scenario("gamma", 2.0, 0.5, 1.5, 0.5, -1.0, {50.0, 5000}, 5000, derive_seed(seed, "gamma"));
  s.c0 = kappa_coefficients(s.agent, s.population, 0.0, s.drift).gamma_mean();
  return s;
}

// q > 0: consumption vanishes.
inline PowerScenario default_extinction_scenario(std::uint64_t seed) {
  return power_scenario("extinction", 0.5, 0.5, 0.8, 0.5, -1.0, {50.0, 5000}, 2000, derive_seed(seed, "extinction"));
}

inline const std::vector<double>& default_extinction_horizons() {
  static const std::vector<double> h{10.0, 25.0, 50.0};
  return h;
}

struct SuiteOptions {
  std::uint64_t seed = 20261014;
  unsigned threads = 1;
};

struct SuiteResult {
  std::vector<ResidualReport> reports;
  ConvergenceTable convergence;
  ExtinctionReport extinction;
  GammaLimitReport gamma;
  bool anyFail() const {
    for (const auto& r : reports)
      if (r.verdict == Verdict::Fail) return true;
    return false;
  }
};

inline SuiteResult run_verification_suite(const SuiteOptions& o) {
  SuiteResult res;
  BestResponseScenario mart = default_martingale_scenario(o.seed);
  mart.threads = o.threads;
  res.reports.push_back(martingale_residual(mart, {}));
  for (const Strategy& st : default_perturbations()) {
    ResidualReport r = martingale_residual(mart, st);
    r.scenario += "(dpi=" + format_double(st.piShift) + ",cscale=" + format_double(st.cScale) + ")";
    res.reports.push_back(r);
  }
  NestedScenario nest = default_compatibility_scenario(o.seed);
  nest.threads = o.threads;
  const CompatibilityReport comp = compatibility_residual(nest);
  res.reports.push_back(comp.consumption);
  res.reports.push_back(comp.wealth);
  res.convergence = explicit_vs_euler(default_logistic_scenario(o.seed));
  res.reports.push_back(res.convergence.report);
  res.reports.push_back(logistic_ode_check(0.5, 0.3, 0.4, 1.0, 1e-4));
  PowerScenario gam = default_gamma_scenario(o.seed);
  gam.threads = o.threads;
  res.gamma = gamma_limit(gam);
  res.reports.push_back(res.gamma.ks.report);
  res.reports.push_back(res.gamma.mean);
  PowerScenario ext = default_extinction_scenario(o.seed);
  ext.threads = o.threads;
  res.extinction = extinction_probe(ext, default_extinction_horizons(), 1e-3);
  res.reports.push_back(res.extinction.report);
  return res;
}

}  // namespace fwdrel
