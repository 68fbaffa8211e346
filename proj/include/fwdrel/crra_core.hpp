#pragma once
// CRRA building blocks for one agent facing given competitor aggregates:
// best responses, drift conditions on (Z, phi) and the dynamics of
// Y = (phi / Z)^(1/alpha).

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fwdrel/market_population.hpp"
#include "fwdrel/sde_engine.hpp"

namespace fwdrel {

// Averages over the competitors of agent i.
struct CompetitorAggregates {
  double mu_pi = 0.0;      // mean of mu_k pi_k
  double nu_pi2 = 0.0;     // mean of (nu_k pi_k)^2
  double sigma_pi = 0.0;   // mean of sigma_k pi_k
  double Sigma_pi2 = 0.0;  // mean of (nu_k^2 + sigma_k^2) pi_k^2
  double c_bar = 0.0;      // arithmetic mean consumption rate
  double c_tilde = 1.0;    // geometric mean consumption rate

  static CompetitorAggregates homogeneous(const StockParams& s, double pi, double c) {
    return {s.mu * pi, s.nu * s.nu * pi * pi, s.sigma * pi, s.Sigma() * pi * pi, c, c};
  }
};

struct FGTerms {
  double f = 0.0;
  double g = 0.0;
};

// n is the population size; n == 0 selects the mean-field limit, where the
// idiosyncratic competitor noise averages out.
inline FGTerms f_g_terms(double theta, const CompetitorAggregates& a, std::size_t n) {
  if (n == 1) throw std::invalid_argument("f_g_terms: need at least two players");
  const double idio = n == 0 ? 0.0 : a.nu_pi2 / double(n - 1);
  FGTerms out;
  out.f = -theta * a.mu_pi + 0.5 * theta * a.Sigma_pi2 + 0.5 * theta * theta * (a.sigma_pi * a.sigma_pi + idio);
  out.g = theta * theta * idio + theta * theta * a.sigma_pi * a.sigma_pi;
  return out;
}

// Drift of Z in the absence of the consumption feedback term.
inline double zbar_from_terms(const AgentType& a, double t, double sigmaPi, const FGTerms& fg, double cBar,
                              double piStar) {
  const double al = a.alpha, th = a.theta;
  return (1.0 - al) * (a.deltaZ.B(t) * th * sigmaPi - fg.f + 0.5 * al * (fg.g - a.stock.Sigma() * piStar * piStar) -
                       th * cBar);
}

inline double zbar_drift(const AgentType& a, double t, const CompetitorAggregates& agg, std::size_t n, double piStar) {
  return zbar_from_terms(a, t, agg.sigma_pi, f_g_terms(a.theta, agg, n), agg.c_bar, piStar);
}

// Optimal portfolio against a competitor average sigma_pi.
inline double best_response_portfolio(const AgentType& a, double t, double sigmaPi) {
  const StockParams& s = a.stock;
  const double al = a.alpha, th = a.theta;
  const double excess = a.deltaZ.W(t) * s.nu + a.deltaZ.B(t) * s.sigma + s.mu;
  return (s.sigma * th * sigmaPi + (excess - th * s.sigma * sigmaPi) / al) / s.Sigma();
}

// c_tilde^(-theta (1 - alpha) / alpha): ratio of optimal consumption to Y.
inline double consumption_multiplier(double alpha, double theta, double cTilde) {
  if (!(cTilde > 0.0)) throw std::invalid_argument("consumption_multiplier: c_tilde must be positive");
  return std::pow(cTilde, -theta * (1.0 - alpha) / alpha);
}

inline double best_response_consumption(const AgentType& a, double cTilde, double Y) {
  return consumption_multiplier(a.alpha, a.theta, cTilde) * Y;
}

inline double consistency_drift_Z(const AgentType& a, double zbar, double cTilde, double Y) {
  return zbar - a.alpha * consumption_multiplier(a.alpha, a.theta, cTilde) * Y;
}

inline double consistency_drift_phi(const AgentType& a, double phibar, double cTilde, double Y) {
  return phibar - a.lambda * a.alpha * consumption_multiplier(a.alpha, a.theta, cTilde) * Y;
}

// Coefficients of dY = Y ((bYbar - rho Y) dt + dW dW + dB dB) obtained by Ito's
// formula applied to (phi / Z)^(1/alpha) under the drift conditions above.
struct RatioCoefficients {
  double bYbar = 0.0;
  double volW = 0.0;
  double volB = 0.0;
};

inline RatioCoefficients ratio_coefficients(const AgentType& a, double t, double zbar, double phibar) {
  const double al = a.alpha;
  const double zw = a.deltaZ.W(t), zb = a.deltaZ.B(t);
  const double pw = phi_vol_W(a, t), pb = phi_vol_B(a, t);
  RatioCoefficients r;
  r.volW = (pw - zw) / al;
  r.volB = (pb - zb) / al;
  const double dz2 = zw * zw + zb * zb, dp2 = pw * pw + pb * pb;
  r.bYbar = (phibar - zbar) / al + (dz2 - dp2) / (2.0 * al) + 0.5 * (r.volW * r.volW + r.volB * r.volB);
  return r;
}

// Time-dependent coefficients of a logistic SDE
//   dY = Y ((bbar(t) - rho(t) Y) dt + volW(t) dW + volB(t) dB),  rho >= 0.
struct LogisticCoefficients {
  std::function<double(double)> bbar;
  std::function<double(double)> volW;
  std::function<double(double)> volB;
  std::function<double(double)> rho;
};

// Y_t = E_t^{-1} / (1/Y_0 + int_0^t E_s^{-1} rho_s ds) with
// E_t = exp(int (|vol|^2/2 - bbar) ds - int vol dW). The time integral uses
// the trapezoid rule on the grid.
inline ProcessPath logistic_explicit(double Y0, const LogisticCoefficients& c, const PathBundle& bundle,
                                     std::size_t idio) {
  if (!(Y0 > 0.0)) throw std::invalid_argument("logistic_explicit: Y0 must be positive");
  const TimeGrid& g = bundle.grid;
  const double dt = g.dt();
  ProcessPath p{std::vector<double>(g.nodes()), std::vector<double>(g.nodes())};
  double logEinv = 0.0, integral = 0.0;
  double prev = c.rho(0.0);  // rho * E^{-1} at the previous node
  if (prev < 0.0) throw std::invalid_argument("logistic_explicit: rho must be nonnegative");
  p.x[0] = Y0;
  for (std::size_t k = 0; k < g.steps; ++k) {
    const double t = g.t(k);
    const double w = c.volW(t), s = c.volB(t);
    const double dW = bundle.idio.empty() ? 0.0 : bundle.dW(idio, k);
    logEinv += (c.bbar(t) - 0.5 * (w * w + s * s)) * dt + w * dW + s * bundle.dB(k);
    const double Einv = std::exp(logEinv);
    const double r = c.rho(g.t(k + 1));
    if (r < 0.0) throw std::invalid_argument("logistic_explicit: rho must be nonnegative");
    integral += 0.5 * dt * (prev + r * Einv);
    prev = r * Einv;
    p.t[k + 1] = g.t(k + 1);
    p.x[k + 1] = Einv / (1.0 / Y0 + integral);
  }
  return p;
}

// Direct log-Euler integration of the same SDE.
inline ProcessPath logistic_log_euler(double Y0, const LogisticCoefficients& c, const PathBundle& bundle,
                                      std::size_t idio) {
  return integrate_log_euler(
      Y0, [&](double t, double y) { return c.bbar(t) - c.rho(t) * y; }, c.volW, c.volB, bundle, idio);
}

// Closed form for the deterministic case Y' = Y (b - rho Y) with constants.
inline double logistic_ode_closed_form(double Y0, double b, double rho, double t) {
  if (b == 0.0) return 1.0 / (1.0 / Y0 + rho * t);
  return 1.0 / (std::exp(-b * t) / Y0 + rho * (1.0 - std::exp(-b * t)) / b);
}

// Best-response ratio process for an agent with Free coupling, given b^Z-bar
// and the competitor geometric mean consumption as functions of time.
inline LogisticCoefficients best_response_logistic(const AgentType& a, std::function<double(double)> zbar,
                                                   std::function<double(double)> cTilde) {
  require_valid(a);
  const double lam = effective_lambda(a);
  LogisticCoefficients c;
  c.bbar = [a, zbar](double t) {
    const double zb = zbar(t);
    return ratio_coefficients(a, t, zb, phi_bar_drift(a, t, zb)).bYbar;
  };
  c.volW = [a](double t) { return (phi_vol_W(a, t) - a.deltaZ.W(t)) / a.alpha; };
  c.volB = [a](double t) { return (phi_vol_B(a, t) - a.deltaZ.B(t)) / a.alpha; };
  c.rho = [a, lam, cTilde](double t) { return (lam - 1.0) * consumption_multiplier(a.alpha, a.theta, cTilde(t)); };
  return c;
}

inline ProcessPath logistic_explicit_Y(const AgentType& a, std::function<double(double)> zbar,
                                       std::function<double(double)> cTilde, const PathBundle& bundle,
                                       std::size_t idio) {
  const double Y0 = std::pow(initial_phi(a) / a.z0, 1.0 / a.alpha);
  return logistic_explicit(Y0, best_response_logistic(a, std::move(zbar), std::move(cTilde)), bundle, idio);
}

// Z, phi simulated separately under the drift conditions, for cross-checks of
// the ratio dynamics.
struct FieldPaths {
  ProcessPath Z;
  ProcessPath phi;
};

inline FieldPaths simulate_fields(const AgentType& a, std::function<double(double)> zbar,
                                  std::function<double(double)> cTilde, const PathBundle& bundle, std::size_t idio) {
  require_valid(a);
  const TimeGrid& g = bundle.grid;
  const double dt = g.dt(), lam = effective_lambda(a);
  FieldPaths out{{std::vector<double>(g.nodes()), std::vector<double>(g.nodes())},
                 {std::vector<double>(g.nodes()), std::vector<double>(g.nodes())}};
  double lz = std::log(a.z0), lp = std::log(initial_phi(a));
  out.Z.x[0] = a.z0;
  out.phi.x[0] = initial_phi(a);
  for (std::size_t k = 0; k < g.steps; ++k) {
    const double t = g.t(k);
    const double Y = std::exp((lp - lz) / a.alpha);
    const double feed = a.alpha * consumption_multiplier(a.alpha, a.theta, cTilde(t)) * Y;
    const double zb = zbar(t);
    const double zw = a.deltaZ.W(t), zB = a.deltaZ.B(t), pw = phi_vol_W(a, t), pB = phi_vol_B(a, t);
    const double dW = bundle.idio.empty() ? 0.0 : bundle.dW(idio, k), dB = bundle.dB(k);
    lz += (zb - feed - 0.5 * (zw * zw + zB * zB)) * dt + zw * dW + zB * dB;
    lp += (phi_bar_drift(a, t, zb) - lam * feed - 0.5 * (pw * pw + pB * pB)) * dt + pw * dW + pB * dB;
    out.Z.t[k + 1] = out.phi.t[k + 1] = g.t(k + 1);
    out.Z.x[k + 1] = std::exp(lz);
    out.phi.x[k + 1] = std::exp(lp);
  }
  return out;
}

// Z through L = Z^(1/alpha), which solves a linear SDE for a given phi path:
//   L_t = E_t (L_0 - int_0^t E_s^{-1} m_s phi_s^(1/alpha) ds),
//   E_t = exp(int (bbar/alpha - |deltaZ|^2/(2 alpha)) ds + int deltaZ/alpha dW),
// with m = c_tilde^(-theta (1 - alpha)/alpha). Nodes where L is not positive
// are reported as NaN.
inline ProcessPath linear_representation_Z(const AgentType& a, std::function<double(double)> zbar,
                                           const ProcessPath& phi, std::function<double(double)> cTilde,
                                           const PathBundle& bundle, std::size_t idio) {
  const TimeGrid& g = bundle.grid;
  if (phi.x.size() != g.nodes()) throw std::invalid_argument("linear_representation_Z: phi path length mismatch");
  const double dt = g.dt(), al = a.alpha;
  ProcessPath p{std::vector<double>(g.nodes()), std::vector<double>(g.nodes())};
  const double L0 = std::pow(a.z0, 1.0 / al);
  double logE = 0.0, integral = 0.0;
  auto forcing = [&](std::size_t k) {
    return consumption_multiplier(al, a.theta, cTilde(g.t(k))) * std::pow(phi.x[k], 1.0 / al);
  };
  double prev = forcing(0);
  p.x[0] = a.z0;
  for (std::size_t k = 0; k < g.steps; ++k) {
    const double t = g.t(k);
    const double zw = a.deltaZ.W(t), zb = a.deltaZ.B(t);
    const double dW = bundle.idio.empty() ? 0.0 : bundle.dW(idio, k);
    logE += (zbar(t) / al - (zw * zw + zb * zb) / (2.0 * al)) * dt + (zw * dW + zb * bundle.dB(k)) / al;
    const double cur = std::exp(-logE) * forcing(k + 1);
    integral += 0.5 * dt * (prev + cur);
    prev = cur;
    const double L = std::exp(logE) * (L0 - integral);
    p.t[k + 1] = g.t(k + 1);
    p.x[k + 1] = L > 0.0 ? std::pow(L, al) : std::nan("");
  }
  return p;
}

}  // namespace fwdrel
