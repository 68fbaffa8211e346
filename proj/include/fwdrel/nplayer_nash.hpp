#pragma once
// Finite-population Nash equilibrium for CRRA agents.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fwdrel/crra_core.hpp"
#include "fwdrel/market_population.hpp"
#include "fwdrel/sde_engine.hpp"

namespace fwdrel {

class DegenerateEquilibrium : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RegimeViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kDegenerateTol = 1e-10;

namespace detail {
inline double excess_return(const AgentType& a, double t) {
  return a.deltaZ.W(t) * a.stock.nu + a.deltaZ.B(t) * a.stock.sigma + a.stock.mu;
}
// nu^2 + sigma^2 (1 + theta (1 - 1/alpha) / (n - 1)): own-portfolio weight
// once the agent's contribution to the competitor average is solved out.
inline double nash_denominator(const AgentType& a, std::size_t n) {
  const StockParams& s = a.stock;
  return s.nu * s.nu + s.sigma * s.sigma * (1.0 + a.theta * (1.0 - 1.0 / a.alpha) / double(n - 1));
}
inline void require_players(const std::vector<AgentType>& agents) {
  if (agents.size() < 2) throw std::invalid_argument("n-player equilibrium needs at least two agents");
  for (const auto& a : agents) require_valid(a);
}
}  // namespace detail

inline double psi_n(const std::vector<AgentType>& agents) {
  detail::require_players(agents);
  const std::size_t n = agents.size();
  double s = 0.0;
  for (const auto& a : agents) {
    const StockParams& st = a.stock;
    s += st.sigma * st.sigma * a.theta * (1.0 - 1.0 / a.alpha) / detail::nash_denominator(a, n);
  }
  return s / double(n - 1);
}

inline double varphi_n(const std::vector<AgentType>& agents, double t) {
  detail::require_players(agents);
  const std::size_t n = agents.size();
  double s = 0.0;
  for (const auto& a : agents)
    s += (a.stock.sigma / a.alpha) * detail::excess_return(a, t) / detail::nash_denominator(a, n);
  return s / double(n);
}

inline double equilibrium_sigma_pi(double psi, double varphi) {
  if (std::abs(1.0 - psi) < kDegenerateTol)
    throw DegenerateEquilibrium("equilibrium_sigma_pi: 1 - psi vanishes (psi = " + std::to_string(psi) + ")");
  return varphi / (1.0 - psi);
}

struct NashPortfolio {
  double psi = 0.0;
  double varphi = 0.0;
  double sigma_pi_bar = 0.0;  // average of sigma_k pi_k over all n agents
  std::vector<double> pi;
};

inline NashPortfolio nash_portfolio(const std::vector<AgentType>& agents, double t) {
  NashPortfolio out;
  out.psi = psi_n(agents);
  out.varphi = varphi_n(agents, t);
  out.sigma_pi_bar = equilibrium_sigma_pi(out.psi, out.varphi);
  const std::size_t n = agents.size();
  const double scale = double(n) / double(n - 1);
  out.pi.reserve(n);
  for (const auto& a : agents) {
    const double lead = a.stock.sigma * a.theta * (1.0 - 1.0 / a.alpha) * scale * out.sigma_pi_bar;
    out.pi.push_back((lead + detail::excess_return(a, t) / a.alpha) / detail::nash_denominator(a, n));
  }
  return out;
}

// Aggregates over k != i of the equilibrium portfolios and given consumption rates.
inline CompetitorAggregates competitor_aggregates(const std::vector<AgentType>& agents, const std::vector<double>& pi,
                                                  const std::vector<double>& c, std::size_t i) {
  const std::size_t n = agents.size();
  CompetitorAggregates g{0, 0, 0, 0, 0, 0};
  double logc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == i) continue;
    const StockParams& s = agents[k].stock;
    g.mu_pi += s.mu * pi[k];
    g.nu_pi2 += s.nu * s.nu * pi[k] * pi[k];
    g.sigma_pi += s.sigma * pi[k];
    g.Sigma_pi2 += s.Sigma() * pi[k] * pi[k];
    g.c_bar += c[k];
    logc += std::log(c[k]);
  }
  const double m = double(n - 1);
  g.mu_pi /= m;
  g.nu_pi2 /= m;
  g.sigma_pi /= m;
  g.Sigma_pi2 /= m;
  g.c_bar /= m;
  g.c_tilde = std::exp(logc / m);
  return g;
}

// Sign regimes for existence of the consumption equilibrium.
inline void check_nash_regime(const std::vector<AgentType>& agents) {
  detail::require_players(agents);
  const std::size_t n = agents.size();
  std::size_t below = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = agents[i];
    if (a.coupling.kind == CouplingKind::Power)
      throw RegimeViolation("power coupling is only supported in the mean-field setting");
    if (a.alpha < 1.0) ++below;
    if (!(a.alpha > a.theta / (double(n - 1) + a.theta)))
      throw RegimeViolation("agent " + std::to_string(i) + ": alpha must exceed theta/(n-1+theta)");
  }
  if (below != 0 && below != n) throw RegimeViolation("mixed populations with alpha on both sides of 1 are not covered");
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = effective_lambda(agents[i]);
    if (below == n && lam != 1.0) throw RegimeViolation("alpha < 1 requires lambda = 1");
    if (below == 0 && lam < 1.0) throw RegimeViolation("alpha > 1 requires lambda >= 1");
  }
}

// D_k = alpha_k (n-1) - theta_k (1 - alpha_k) and xi = sum theta_k (1-alpha_k)/D_k.
struct EtaMatrix {
  std::size_t n = 0;
  std::vector<double> D;
  double xi = 0.0;
  std::vector<double> eta;  // row-major n x n
  double operator()(std::size_t i, std::size_t k) const { return eta[i * n + k]; }
};

inline EtaMatrix eta_matrix(const std::vector<AgentType>& agents) {
  check_nash_regime(agents);
  const std::size_t n = agents.size();
  EtaMatrix E;
  E.n = n;
  E.D.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& a = agents[k];
    E.D[k] = a.alpha * double(n - 1) - a.theta * (1.0 - a.alpha);
    E.xi += a.theta * (1.0 - a.alpha) / E.D[k];
  }
  if (std::abs(E.xi + 1.0) < kDegenerateTol) throw DegenerateEquilibrium("eta_matrix: xi + 1 vanishes");
  E.eta.assign(n * n, 0.0);
  const double m = double(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = agents[i].theta * (1.0 - agents[i].alpha);
    for (std::size_t k = 0; k < n; ++k) {
      const double cross = -m * ti / ((E.xi + 1.0) * E.D[i] * E.D[k]);
      E.eta[i * n + k] = (k == i) ? m / E.D[i] + cross : cross;
    }
  }
  return E;
}

// Equilibrium consumption from the ratios R_k = phi_k / Z_k.
inline std::vector<double> nash_consumption_closed_form(const std::vector<AgentType>& agents,
                                                        const std::vector<double>& R) {
  const EtaMatrix E = eta_matrix(agents);
  const std::size_t n = agents.size();
  if (R.size() != n) throw std::invalid_argument("nash_consumption_closed_form: size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!(R[k] > 0.0)) throw std::invalid_argument("nash_consumption_closed_form: ratios must be positive");
    s += std::log(R[k]) / E.D[k];
  }
  const double logCt = double(n - 1) / (double(n) * (E.xi + 1.0)) * s;
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = agents[i];
    c[i] = std::exp(-double(n) * a.theta * (1.0 - a.alpha) / E.D[i] * logCt + double(n - 1) / E.D[i] * std::log(R[i]));
  }
  return c;
}

inline std::vector<double> nash_consumption_eta(const EtaMatrix& E, const std::vector<double>& R) {
  std::vector<double> c(E.n);
  for (std::size_t i = 0; i < E.n; ++i) {
    double l = 0.0;
    for (std::size_t k = 0; k < E.n; ++k) l += E(i, k) * std::log(R[k]);
    c[i] = std::exp(l);
  }
  return c;
}

// Largest relative deviation from the individual best-response identity
// c_i = c_tilde_{-i}^(theta (1 - 1/alpha)) R_i^(1/alpha).
inline double best_response_defect(const std::vector<AgentType>& agents, const std::vector<double>& R,
                                   const std::vector<double>& c) {
  const std::size_t n = agents.size();
  double logSum = 0.0, worst = 0.0;
  for (double v : c) logSum += std::log(v);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = agents[i];
    const double cTilde = std::exp((logSum - std::log(c[i])) / double(n - 1));
    const double br = consumption_multiplier(a.alpha, a.theta, cTilde) * std::pow(R[i], 1.0 / a.alpha);
    worst = std::max(worst, std::abs(br - c[i]) / std::abs(c[i]));
  }
  return worst;
}

struct NashSimulation {
  std::vector<ProcessPath> R;
  std::vector<ProcessPath> c;
  std::vector<double> interaction;  // -sum_ik (lambda_k - 1) eta_ik alpha_k c_i^2 c_k
  std::vector<double> dissipation;  // full quadratic form including the linear part
  double max_best_response_defect = 0.0;
};

// Simulates log R_i under the drift conditions with the equilibrium
// portfolios; consumption is recovered node by node from the closed form.
// Agent i uses idiosyncratic path i of the bundle.
inline NashSimulation simulate_nash_consumption(const std::vector<AgentType>& agents, const PathBundle& bundle) {
  const EtaMatrix E = eta_matrix(agents);
  const std::size_t n = agents.size();
  if (bundle.idio.size() < n) throw std::invalid_argument("simulate_nash_consumption: bundle has too few paths");
  const TimeGrid& g = bundle.grid;
  const double dt = g.dt();
  NashSimulation out;
  out.R.assign(n, {std::vector<double>(g.nodes()), std::vector<double>(g.nodes())});
  out.c = out.R;
  out.interaction.resize(g.nodes());
  out.dissipation.resize(g.nodes());
  std::vector<double> logR(n), R(n);
  for (std::size_t i = 0; i < n; ++i) {
    R[i] = initial_phi(agents[i]) / agents[i].z0;
    logR[i] = std::log(R[i]);
  }
  std::vector<double> base(n), vw(n), vb(n);
  for (std::size_t k = 0;; ++k) {
    const double t = g.t(k);
    const std::vector<double> c = nash_consumption_closed_form(agents, R);
    out.max_best_response_defect = std::max(out.max_best_response_defect, best_response_defect(agents, R, c));
    const NashPortfolio P = nash_portfolio(agents, t);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = agents[i];
      out.R[i].t[k] = out.c[i].t[k] = t;
      out.R[i].x[k] = R[i];
      out.c[i].x[k] = c[i];
      const double zb = zbar_drift(a, t, competitor_aggregates(agents, P.pi, c, i), n, P.pi[i]);
      const double zw = a.deltaZ.W(t), zB = a.deltaZ.B(t), pw = phi_vol_W(a, t), pB = phi_vol_B(a, t);
      base[i] = phi_bar_drift(a, t, zb) - zb - 0.5 * (pw * pw + pB * pB) + 0.5 * (zw * zw + zB * zB);
      vw[i] = pw - zw;
      vb[i] = pB - zB;
    }
    double inter = 0.0, diss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double beta = 0.0, dcW2 = 0.0, dcB = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        beta += E(i, j) * base[j];
        dcW2 += E(i, j) * E(i, j) * vw[j] * vw[j];
        dcB += E(i, j) * vb[j];
        inter -= (effective_lambda(agents[j]) - 1.0) * E(i, j) * agents[j].alpha * c[i] * c[i] * c[j];
      }
      diss += c[i] * c[i] * (beta + 0.5 * (dcW2 + dcB * dcB));
    }
    out.interaction[k] = inter;
    out.dissipation[k] = diss + inter;
    if (k == g.steps) break;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = agents[i];
      const double drift = base[i] - (effective_lambda(a) - 1.0) * a.alpha * c[i];
      logR[i] += drift * dt + vw[i] * bundle.dW(i, k) + vb[i] * bundle.dB(k);
      R[i] = std::exp(logR[i]);
    }
  }
  return out;
}

}  // namespace fwdrel
