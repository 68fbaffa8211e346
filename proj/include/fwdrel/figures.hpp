#pragma once
// Grids and trajectories for the single-stock mean-field figures.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fwdrel/meanfield_nash.hpp"
#include "fwdrel/sde_engine.hpp"

namespace fwdrel {

struct TrajectorySpec {
  std::string name;
  double alpha = 1.65;
  double theta = 0.65;
};

struct FigureConfig {
  std::vector<double> alphas;  // defaults filled by default_figure_config()
  std::vector<double> thetas;
  double mu = 0.3;
  double sigma = 1.0;
  double nu = 0.0;
  double deltaZB = 0.5;
  // Reference population: independent alpha and theta with the given values
  // of 1/alpha and theta on a product grid.
  std::vector<double> popInvAlpha{1.5, 2.5};
  std::vector<double> popTheta{0.5, 0.9};
  double Kpos = 1.4, ElogKpos = 0.5;
  double Kneg = 0.7, ElogKneg = -0.5;
  double kappa = -0.5;
  std::vector<double> qDeltas{0.0, 0.25, 0.5};
  double asymptoticDelta = 0.25;
  std::vector<TrajectorySpec> trajectories{{"alpha165_theta065", 1.65, 0.65}, {"alpha055_theta035", 0.55, 0.35}};
  double trajectoryDelta = 0.25;
  TimeGrid trajectoryGrid{20.0, 2000};
  double c0 = 1.0;
  std::uint64_t seed = 1;
  KappaDrift drift = KappaDrift::Displayed;
};

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1);
  return v;
}

inline FigureConfig default_figure_config() {
  FigureConfig c;
  c.alphas = linspace(0.05, 2.95, 59);
  c.thetas = linspace(0.0, 1.0, 21);
  return c;
}

// Single-stock agent: nu = 0 and no idiosyncratic field noise.
inline AgentType figure_agent(const FigureConfig& c, double alpha, double theta, double deltaB) {
  AgentType a;
  a.alpha = alpha;
  a.theta = theta;
  a.stock = {c.mu, c.nu, c.sigma};
  a.deltaZ = VolSchedule::constant(0.0, deltaB);
  return a;
}

inline std::vector<AgentType> figure_population(const FigureConfig& c, double deltaB, Coupling coupling = {}) {
  std::vector<AgentType> pop;
  for (double ia : c.popInvAlpha)
    for (double th : c.popTheta) {
      AgentType a = figure_agent(c, 1.0 / ia, th, deltaB);
      a.coupling = coupling;
      pop.push_back(a);
    }
  return pop;
}

inline Coupling power_coupling(double kappa) {
  Coupling k;
  k.kind = CouplingKind::Power;
  k.kappa = kappa;
  return k;
}

inline Coupling proportional_coupling(double K) {
  Coupling k;
  k.kind = CouplingKind::Proportional;
  k.K = K;
  return k;
}

struct GridTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> log;  // one line per NaN cell
};

inline void write_csv(std::ostream& os, const GridTable& t) {
  for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << t.columns[j];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << format_double(r[j]);
    os << '\n';
  }
}

namespace detail {
// Evaluates f on the (alpha, theta) grid; failures become NaN with a log line.
inline GridTable alpha_theta_grid(const std::string& name, const FigureConfig& c,
                                  const std::function<double(double, double)>& f) {
  GridTable t{name, {"alpha", "theta", "value"}, {}, {}};
  for (double al : c.alphas)
    for (double th : c.thetas) {
      double v = std::nan("");
      if (std::abs(al - 1.0) < kAlphaBand) {
        t.log.push_back(name + ": alpha=" + format_double(al) + " theta=" + format_double(th) + ": alpha = 1 excluded");
      } else {
        try {
          v = f(al, th);
        } catch (const std::exception& e) {
          t.log.push_back(name + ": alpha=" + format_double(al) + " theta=" + format_double(th) + ": " + e.what());
        }
      }
      t.rows.push_back({al, th, v});
    }
  return t;
}
}  // namespace detail

inline GridTable figure_k_surface(const FigureConfig& c) {
  const auto pop = figure_population(c, c.deltaZB);
  return detail::alpha_theta_grid("k_surface", c, [&](double al, double th) {
    return k_alpha_theta(figure_agent(c, al, th, c.deltaZB), pop);
  });
}

inline GridTable figure_portfolio_surface(const FigureConfig& c) {
  const auto pop = figure_population(c, c.deltaZB);
  const MFEquilibrium e = mf_equilibrium(pop, 0.0);
  return detail::alpha_theta_grid("portfolio_surface", c, [&](double al, double th) {
    return mf_portfolio(figure_agent(c, al, th, c.deltaZB), e, 0.0);
  });
}

inline GridTable figure_consumption_surface(const FigureConfig& c, bool positive) {
  const double K = positive ? c.Kpos : c.Kneg, ElogK = positive ? c.ElogKpos : c.ElogKneg;
  const auto pop = figure_population(c, c.deltaZB, proportional_coupling(std::exp(ElogK)));
  return detail::alpha_theta_grid(positive ? "consumption_surface_kpos" : "consumption_surface_kneg", c,
                                  [&](double al, double th) {
                                    AgentType a = figure_agent(c, al, th, c.deltaZB);
                                    a.coupling = proportional_coupling(K);
                                    return proportional_consumption(a, pop);
                                  });
}

inline KappaCoefficients figure_kappa(const FigureConfig& c, double al, double th, double deltaB) {
  AgentType a = figure_agent(c, al, th, deltaB);
  a.coupling = power_coupling(c.kappa);
  return kappa_coefficients(a, figure_population(c, deltaB, power_coupling(c.kappa)), 0.0, c.drift);
}

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Sign of q per volatility level: +1 extinction, -1 Gamma limit.
inline GridTable figure_q_sign_region(const FigureConfig& c) {
  GridTable t{"q_sign_region", {"alpha", "theta", "deltaZB", "value"}, {}, {}};
  for (double d : c.qDeltas) {
    const GridTable g = detail::alpha_theta_grid("q_sign_region", c, [&](double al, double th) {
      return sign_of(-figure_kappa(c, al, th, d).bA);
    });
    for (const auto& r : g.rows) t.rows.push_back({r[0], r[1], d, r[2]});
    t.log.insert(t.log.end(), g.log.begin(), g.log.end());
  }
  return t;
}

// Long-run consumption level with volatility and in the zero-volatility benchmark.
inline GridTable figure_asymptotic_consumption(const FigureConfig& c) {
  GridTable t{"asymptotic_consumption", {"alpha", "theta", "stochastic", "benchmark"}, {}, {}};
  const GridTable s = detail::alpha_theta_grid("asymptotic_consumption", c, [&](double al, double th) {
    return stochastic_limit_level(figure_kappa(c, al, th, c.asymptoticDelta));
  });
  const GridTable b = detail::alpha_theta_grid("asymptotic_consumption", c, [&](double al, double th) {
    return stochastic_limit_level(figure_kappa(c, al, th, 0.0));
  });
  for (std::size_t i = 0; i < s.rows.size(); ++i) t.rows.push_back({s.rows[i][0], s.rows[i][1], s.rows[i][2], b.rows[i][2]});
  t.log = s.log;
  t.log.insert(t.log.end(), b.log.begin(), b.log.end());
  return t;
}

// One stochastic path and the deterministic benchmark per TrajectorySpec.
inline GridTable figure_trajectory(const FigureConfig& c, const TrajectorySpec& ts, std::size_t index) {
  GridTable t{"trajectory_" + ts.name, {"t", "stochastic", "benchmark"}, {}, {}};
  AgentType a = figure_agent(c, ts.alpha, ts.theta, c.trajectoryDelta);
  a.coupling = power_coupling(c.kappa);
  const auto pop = figure_population(c, c.trajectoryDelta, power_coupling(c.kappa));
  const PathBundle b = generate_bundle(c.trajectoryGrid, 1, c.seed, index);
  const ProcessPath p = power_consumption_path(a, pop, b, 0, c.c0, c.drift);
  const KappaCoefficients bench = benchmark_coefficients(a, pop, c.drift);
  for (std::size_t k = 0; k < p.t.size(); ++k) t.rows.push_back({p.t[k], p.x[k], benchmark_consumption(bench, c.c0, p.t[k])});
  return t;
}

struct FigureChecks {
  bool signLaw = true;          // sign K = sign(alpha - 1) for theta > 0, K = 0 at theta = 0
  std::size_t signViolations = 0;
  bool disagreementFound = false;
  double disagreeAlpha = std::nan(""), disagreeTheta = std::nan(""), disagreeDelta = std::nan("");
  double disagreeBA = std::nan(""), disagreeBenchBA = std::nan("");
};

inline FigureChecks check_figures(const FigureConfig& c, const GridTable& kSurface) {
  FigureChecks fc;
  for (const auto& r : kSurface.rows) {
    const double al = r[0], th = r[1], K = r[2];
    if (std::isnan(K)) continue;
    const bool ok = th == 0.0 ? K == 0.0 : sign_of(K) == sign_of(al - 1.0);
    if (!ok) {
      fc.signLaw = false;
      ++fc.signViolations;
    }
  }
  // Largest-margin point where the volatile regime is extinction while the
  // benchmark converges to a positive level.
  double best = 0.0;
  for (double d : c.qDeltas) {
    if (d == 0.0) continue;
    for (double al : c.alphas)
      for (double th : c.thetas) {
        if (std::abs(al - 1.0) < kAlphaBand) continue;
        try {
          const KappaCoefficients s = figure_kappa(c, al, th, d), b = figure_kappa(c, al, th, 0.0);
          if (s.bA < 0.0 && b.bA > 0.0 && s.vol2() > 0.0) {
            const double margin = std::min(-s.bA, b.bA);
            if (margin > best) {
              best = margin;
              fc.disagreementFound = true;
              fc.disagreeAlpha = al;
              fc.disagreeTheta = th;
              fc.disagreeDelta = d;
              fc.disagreeBA = s.bA;
              fc.disagreeBenchBA = b.bA;
            }
          }
        } catch (const std::exception&) {
        }
      }
  }
  return fc;
}

inline std::vector<GridTable> emit_all_figures(const FigureConfig& c) {
  std::vector<GridTable> out;
  out.push_back(figure_k_surface(c));
  out.push_back(figure_portfolio_surface(c));
  out.push_back(figure_consumption_surface(c, true));
  out.push_back(figure_consumption_surface(c, false));
  out.push_back(figure_q_sign_region(c));
  out.push_back(figure_asymptotic_consumption(c));
  for (std::size_t i = 0; i < c.trajectories.size(); ++i) out.push_back(figure_trajectory(c, c.trajectories[i], i));
  return out;
}

}  // namespace fwdrel
