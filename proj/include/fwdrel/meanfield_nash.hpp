#pragma once
// Mean-field equilibrium: conditional-mean aggregates replace the finite
// competitor averages. Population expectations are ensemble averages over a
// vector of agent types; a representative agent need not belong to it.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fwdrel/crra_core.hpp"
#include "fwdrel/market_population.hpp"
#include "fwdrel/nplayer_nash.hpp"
#include "fwdrel/sde_engine.hpp"

namespace fwdrel {

struct MFEquilibrium {
  double psi = 0.0;
  double varphi = 0.0;
  double sigma_pi_bar = 0.0;
  double mu_pi_bar = 0.0;
  double Sigma_pi2_bar = 0.0;
  double m = 0.0;  // E[theta (1 - alpha) / alpha]
};

inline double mf_portfolio(const AgentType& a, double t, double sigmaPiBar) {
  const StockParams& s = a.stock;
  return (a.theta * s.sigma * (1.0 - 1.0 / a.alpha) * sigmaPiBar + detail::excess_return(a, t) / a.alpha) / s.Sigma();
}

inline MFEquilibrium mf_equilibrium(const std::vector<AgentType>& pop, double t) {
  if (pop.empty()) throw std::invalid_argument("mf_equilibrium: empty population");
  MFEquilibrium e;
  e.psi = population_expectation(pop, [](const AgentType& a) {
    return a.theta * (1.0 - 1.0 / a.alpha) * a.stock.sigma * a.stock.sigma / a.stock.Sigma();
  });
  e.varphi = population_expectation(pop, [t](const AgentType& a) {
    return (a.stock.sigma / a.alpha) * detail::excess_return(a, t) / a.stock.Sigma();
  });
  e.sigma_pi_bar = equilibrium_sigma_pi(e.psi, e.varphi);
  e.mu_pi_bar = population_expectation(pop, [&](const AgentType& a) { return a.stock.mu * mf_portfolio(a, t, e.sigma_pi_bar); });
  e.Sigma_pi2_bar = population_expectation(pop, [&](const AgentType& a) {
    const double p = mf_portfolio(a, t, e.sigma_pi_bar);
    return a.stock.Sigma() * p * p;
  });
  e.m = population_expectation(pop, [](const AgentType& a) { return a.theta * (1.0 - a.alpha) / a.alpha; });
  return e;
}

inline double mf_portfolio(const AgentType& a, const MFEquilibrium& e, double t) {
  return mf_portfolio(a, t, e.sigma_pi_bar);
}

struct PortfolioSplit {
  double competitive = 0.0;  // driven by the common-noise exposure of the population
  double merton = 0.0;       // classical component
};

inline PortfolioSplit mf_portfolio_split(const AgentType& a, const MFEquilibrium& e, double t) {
  const StockParams& s = a.stock;
  return {a.theta * s.sigma * (1.0 - 1.0 / a.alpha) * e.sigma_pi_bar / s.Sigma(),
          detail::excess_return(a, t) / (a.alpha * s.Sigma())};
}

// Exponent of the population geometric-mean factor in optimal consumption.
inline double k_alpha_theta(double alpha, double theta, double m) {
  if (std::abs(1.0 + m) < kDegenerateTol) throw DegenerateEquilibrium("k_alpha_theta: 1 + E[theta(1-alpha)/alpha] vanishes");
  return -(theta * (1.0 - alpha) / alpha) / (1.0 + m);
}

inline double k_alpha_theta(const AgentType& a, const std::vector<AgentType>& pop) {
  const double m = population_expectation(pop, [](const AgentType& b) { return b.theta * (1.0 - b.alpha) / b.alpha; });
  return k_alpha_theta(a.alpha, a.theta, m);
}

inline CompetitorAggregates mf_aggregates(const MFEquilibrium& e) {
  return {e.mu_pi_bar, 0.0, e.sigma_pi_bar, e.Sigma_pi2_bar, 0.0, 1.0};
}

// Drift of Z without the consumption terms, which enter the drift conditions
// separately in the mean-field setting.
inline double mf_zbar(const AgentType& a, const MFEquilibrium& e, double t) {
  return zbar_drift(a, t, mf_aggregates(e), 0, mf_portfolio(a, e, t));
}

// Coefficients of log Y for Y = (phi/Z)^(1/alpha) before the consumption
// feedback: d log Y = (a - ...) dt + volW dW + volB dB.
struct MFRatio {
  double a = 0.0;
  double volW = 0.0;
  double volB = 0.0;
};

inline MFRatio mf_ratio(const AgentType& ag, const MFEquilibrium& e, double t) {
  const double zb = mf_zbar(ag, e, t);
  const double zw = ag.deltaZ.W(t), zB = ag.deltaZ.B(t), pw = phi_vol_W(ag, t), pB = phi_vol_B(ag, t);
  MFRatio r;
  r.a = (phi_bar_drift(ag, t, zb) - zb) / ag.alpha - ((pw * pw + pB * pB) - (zw * zw + zB * zB)) / (2.0 * ag.alpha);
  r.volW = (pw - zw) / ag.alpha;
  r.volB = (pB - zB) / ag.alpha;
  return r;
}

inline double log_ratio0(const AgentType& a) { return std::log(initial_phi(a) / a.z0) / a.alpha; }

inline double proportional_consumption(const AgentType& a, const std::vector<AgentType>& pop) {
  auto logK = [](const AgentType& b) {
    if (b.coupling.kind != CouplingKind::Proportional)
      throw std::invalid_argument("proportional_consumption: population must use proportional coupling");
    return std::log(b.coupling.K) / b.alpha;
  };
  return std::exp(logK(a) + k_alpha_theta(a, pop) * population_expectation(pop, logK));
}

inline double mf_consumption_initial(const AgentType& a, const std::vector<AgentType>& pop) {
  return std::exp(log_ratio0(a) + k_alpha_theta(a, pop) * population_expectation(pop, [](const AgentType& b) { return log_ratio0(b); }));
}

// Deterministic population quantities on the grid nodes.
struct MFCoefficientTable {
  TimeGrid grid;
  std::vector<MFEquilibrium> eq;
  std::vector<double> abar;     // E[a]
  std::vector<double> volBbar;  // E[volB]
  double m = 0.0;
  double lambda = 1.0;
  double ElogY0 = 0.0;
};

inline MFCoefficientTable mf_coefficient_table(const std::vector<AgentType>& pop, const TimeGrid& g) {
  require_valid(pop);
  MFCoefficientTable tab;
  tab.grid = g;
  tab.lambda = effective_lambda(pop[0]);
  tab.ElogY0 = population_expectation(pop, [](const AgentType& b) { return log_ratio0(b); });
  for (std::size_t k = 0; k < g.nodes(); ++k) {
    const double t = g.t(k);
    tab.eq.push_back(mf_equilibrium(pop, t));
    const MFEquilibrium& e = tab.eq.back();
    tab.abar.push_back(population_expectation(pop, [&](const AgentType& b) { return mf_ratio(b, e, t).a; }));
    tab.volBbar.push_back(population_expectation(pop, [&](const AgentType& b) { return mf_ratio(b, e, t).volB; }));
  }
  tab.m = tab.eq.empty() ? 0.0 : tab.eq[0].m;
  return tab;
}

// Optimal consumption of agent `a` from
//   d log c = (a + K abar - (lambda - 1) c) dt + volW dW + (volB + K volBbar) dB,
// integrated exactly in the log (left-point coefficients).
inline ProcessPath mf_consumption_path(const AgentType& a, const std::vector<AgentType>& pop,
                                       const MFCoefficientTable& tab, const PathBundle& bundle, std::size_t idio) {
  const TimeGrid& g = bundle.grid;
  if (g.steps != tab.grid.steps || g.T != tab.grid.T) throw std::invalid_argument("mf_consumption_path: grid mismatch");
  const double K = k_alpha_theta(a.alpha, a.theta, tab.m), dt = g.dt();
  ProcessPath p{std::vector<double>(g.nodes()), std::vector<double>(g.nodes())};
  double lc = std::log(mf_consumption_initial(a, pop));
  p.x[0] = std::exp(lc);
  for (std::size_t k = 0; k < g.steps; ++k) {
    const double t = g.t(k);
    const MFRatio r = mf_ratio(a, tab.eq[k], t);
    const double dW = bundle.idio.empty() ? 0.0 : bundle.dW(idio, k);
    lc += (r.a + K * tab.abar[k] - (tab.lambda - 1.0) * p.x[k]) * dt + r.volW * dW + (r.volB + K * tab.volBbar[k]) * bundle.dB(k);
    p.t[k + 1] = g.t(k + 1);
    p.x[k + 1] = std::exp(lc);
  }
  return p;
}

// Same process from c = c0 G / (1 + (lambda - 1) c0 int G ds), where G is the
// stochastic exponential of the linear part. Trapezoid quadrature.
inline ProcessPath mf_consumption_explicit(const AgentType& a, const std::vector<AgentType>& pop,
                                           const MFCoefficientTable& tab, const PathBundle& bundle, std::size_t idio) {
  const TimeGrid& g = bundle.grid;
  const double K = k_alpha_theta(a.alpha, a.theta, tab.m), dt = g.dt();
  const double c0 = mf_consumption_initial(a, pop), rho = tab.lambda - 1.0;
  ProcessPath p{std::vector<double>(g.nodes()), std::vector<double>(g.nodes())};
  double logG = 0.0, integral = 0.0, prevG = 1.0;
  p.x[0] = c0;
  for (std::size_t k = 0; k < g.steps; ++k) {
    const double t = g.t(k);
    const MFRatio r = mf_ratio(a, tab.eq[k], t);
    const double dW = bundle.idio.empty() ? 0.0 : bundle.dW(idio, k);
    logG += (r.a + K * tab.abar[k]) * dt + r.volW * dW + (r.volB + K * tab.volBbar[k]) * bundle.dB(k);
    const double G = std::exp(logG);
    integral += 0.5 * dt * (prevG + G);
    prevG = G;
    p.t[k + 1] = g.t(k + 1);
    p.x[k + 1] = c0 * G / (1.0 + rho * c0 * integral);
  }
  return p;
}

// Power coupling phi = Z^(1-kappa): log-consumption coefficients b^A, delta^A.
enum class KappaDrift {
  Displayed,     // reference closed-form drift
  ItoConsistent  // drift re-derived from the mean-field consumption dynamics
};

struct KappaCoefficients {
  double bA = 0.0;
  double volW = 0.0;
  double volB = 0.0;
  double kappa = 0.0;
  double vol2() const { return volW * volW + volB * volB; }
  // q = -b^A / |delta^A|^2; infinite with the sign of -b^A when delta^A = 0.
  double q() const {
    if (vol2() > 0.0) return -bA / vol2();
    if (bA == 0.0) return 0.0;
    return bA > 0.0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  }
  double gamma_shape() const { return -2.0 * q(); }
  double gamma_scale() const { return vol2() / (2.0 * std::abs(kappa)); }
  double gamma_mean() const { return -bA / kappa; }
};

inline KappaCoefficients kappa_coefficients(const AgentType& a, const std::vector<AgentType>& pop, double t = 0.0,
                                            KappaDrift conv = KappaDrift::Displayed) {
  require_valid(a);
  require_valid(pop);
  if (a.coupling.kind != CouplingKind::Power || pop[0].coupling.kind != CouplingKind::Power)
    throw std::invalid_argument("kappa_coefficients: power coupling required");
  const double kap = a.coupling.kappa;
  if (kap != pop[0].coupling.kappa) throw std::invalid_argument("kappa_coefficients: kappa must match the population");
  if (!(kap < 0.0)) throw std::invalid_argument("kappa_coefficients: kappa must be negative");
  const MFEquilibrium e = mf_equilibrium(pop, t);
  const double K = k_alpha_theta(a.alpha, a.theta, e.m), al = a.alpha;
  const double zb = mf_zbar(a, e, t), d2 = a.deltaZ.norm2(t);
  const double EzbA = population_expectation(pop, [&](const AgentType& b) { return mf_zbar(b, e, t) / b.alpha; });
  KappaCoefficients c;
  c.kappa = kap;
  c.volW = -(kap / al) * a.deltaZ.W(t);
  if (conv == KappaDrift::Displayed) {
    const double Einv = population_expectation(pop, [](const AgentType& b) { return 1.0 / b.alpha; });
    const double Ed2 = population_expectation(pop, [t](const AgentType& b) { return b.deltaZ.norm2(t); });
    const double EdB = population_expectation(pop, [t](const AgentType& b) { return b.deltaZ.B(t); });
    c.bA = (kap / (2.0 * al)) * (2.0 * al - 1.0 - kap * (al - 1.0)) * d2 - (kap / al) * zb +
           K * (0.5 * kap * kap * Einv * Ed2 - kap * EzbA);
    c.volB = -(kap / al) * a.deltaZ.B(t) - kap * K * Einv * EdB;
  } else {
    const double Ed2A = population_expectation(pop, [t](const AgentType& b) { return b.deltaZ.norm2(t) / b.alpha; });
    const double EdBA = population_expectation(pop, [t](const AgentType& b) { return b.deltaZ.B(t) / b.alpha; });
    c.bA = -(kap / al) * zb + (kap / (2.0 * al)) * d2 + K * (0.5 * kap * Ed2A - kap * EzbA);
    c.volB = -(kap / al) * a.deltaZ.B(t) - kap * K * EdBA;
  }
  return c;
}

// c = c0 G / (1 - kappa c0 int G ds) with G = exp(b^A t + delta^A . W_t),
// evaluated recursively so that long horizons do not overflow. Time-varying
// coefficients are frozen at the left node of each step.
inline ProcessPath power_consumption_path(const AgentType& a, const std::vector<AgentType>& pop, const PathBundle& bundle,
                                          std::size_t idio, double c0, KappaDrift conv = KappaDrift::Displayed) {
  if (!(c0 > 0.0)) throw std::invalid_argument("power_consumption_path: c0 must be positive");
  const TimeGrid& g = bundle.grid;
  const double dt = g.dt();
  ProcessPath p{std::vector<double>(g.nodes()), std::vector<double>(g.nodes())};
  p.x[0] = c0;
  KappaCoefficients kc = kappa_coefficients(a, pop, 0.0, conv);
  double tPrev = 0.0;
  for (std::size_t k = 0; k < g.steps; ++k) {
    const double t = g.t(k);
    if (k > 0 && (a.deltaZ.W(t) != a.deltaZ.W(tPrev) || a.deltaZ.B(t) != a.deltaZ.B(tPrev)))
      kc = kappa_coefficients(a, pop, t, conv);
    tPrev = t;
    const double dW = bundle.idio.empty() ? 0.0 : bundle.dW(idio, k);
    const double G = std::exp(kc.bA * dt + kc.volW * dW + kc.volB * bundle.dB(k));
    const double inv = (1.0 / p.x[k] - kc.kappa * 0.5 * dt * (1.0 + G)) / G;
    p.t[k + 1] = g.t(k + 1);
    p.x[k + 1] = 1.0 / inv;
  }
  return p;
}

// Agent and population with all Z volatilities set to zero.
inline AgentType without_volatility(AgentType a) {
  a.deltaZ = VolSchedule::constant(0.0, 0.0);
  return a;
}

inline std::vector<AgentType> without_volatility(std::vector<AgentType> pop) {
  for (auto& a : pop) a = without_volatility(a);
  return pop;
}

// Long-run level of consumption: Gamma mean when q < 0, zero when q > 0.
inline double stochastic_limit_level(const KappaCoefficients& kc) { return kc.bA > 0.0 ? kc.gamma_mean() : 0.0; }

inline KappaCoefficients benchmark_coefficients(const AgentType& a, const std::vector<AgentType>& pop,
                                                KappaDrift conv = KappaDrift::Displayed) {
  return kappa_coefficients(without_volatility(a), without_volatility(pop), 0.0, conv);
}

inline double benchmark_consumption(const KappaCoefficients& bench, double c0, double t) {
  return logistic_ode_closed_form(c0, bench.bA, -bench.kappa, t);
}

}  // namespace fwdrel
