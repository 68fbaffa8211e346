#pragma once
// Agent types, market parameters and population handling.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fwdrel/rng.hpp"

namespace fwdrel {

inline constexpr double kAlphaBand = 1e-9;

// Piecewise-constant function of time. values.size() == knots.size() + 1;
// values[j] applies on [knots[j-1], knots[j]).
struct PiecewiseConstant {
  std::vector<double> knots;
  std::vector<double> values{0.0};

  static PiecewiseConstant constant(double v) { return PiecewiseConstant{{}, {v}}; }

  double operator()(double t) const {
    std::size_t j = 0;
    while (j < knots.size() && t >= knots[j]) ++j;
    return values[j];
  }

  bool well_formed() const {
    if (values.size() != knots.size() + 1) return false;
    for (std::size_t j = 1; j < knots.size(); ++j)
      if (!(knots[j] > knots[j - 1])) return false;
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

// Loadings on the idiosyncratic (W) and common (B) Brownian motions.
struct VolSchedule {
  PiecewiseConstant w = PiecewiseConstant::constant(0.0);
  PiecewiseConstant b = PiecewiseConstant::constant(0.0);

  static VolSchedule constant(double vw, double vb) {
    return {PiecewiseConstant::constant(vw), PiecewiseConstant::constant(vb)};
  }
  double W(double t) const { return w(t); }
  double B(double t) const { return b(t); }
  double norm2(double t) const { return W(t) * W(t) + B(t) * B(t); }
};

struct StockParams {
  double mu = 0.0;
  double nu = 0.0;     // idiosyncratic volatility
  double sigma = 0.0;  // common volatility
  double Sigma() const { return nu * nu + sigma * sigma; }
};

// How the consumption field phi is tied to the terminal field Z.
//  Free:          phi has its own drift bPhiBar and volatility deltaPhi.
//  Proportional:  phi = K * Z.
//  Power:         phi = Z^(1 - kappa), kappa <= 0.
enum class CouplingKind { Free, Proportional, Power };

struct Coupling {
  CouplingKind kind = CouplingKind::Free;
  double K = 1.0;
  double kappa = 0.0;
  PiecewiseConstant bPhiBar = PiecewiseConstant::constant(0.0);
  VolSchedule deltaPhi;
};

struct AgentType {
  double alpha = 2.0;   // relative risk aversion
  double theta = 0.0;   // competition weight
  double lambda = 1.0;  // drift coupling of phi, used with Free coupling
  StockParams stock;
  VolSchedule deltaZ;
  Coupling coupling;
  double x0 = 1.0;
  double z0 = 1.0;
  double phi0 = 1.0;  // used with Free coupling; implied otherwise
};

// lambda implied by the coupling: 1 for proportional, 1 - kappa for power.
inline double effective_lambda(const AgentType& a) {
  switch (a.coupling.kind) {
    case CouplingKind::Proportional: return 1.0;
    case CouplingKind::Power: return 1.0 - a.coupling.kappa;
    default: return a.lambda;
  }
}

inline double initial_phi(const AgentType& a) {
  switch (a.coupling.kind) {
    case CouplingKind::Proportional: return a.coupling.K * a.z0;
    case CouplingKind::Power: return std::pow(a.z0, 1.0 - a.coupling.kappa);
    default: return a.phi0;
  }
}

// Drift and volatility of phi evaluated at t given those of Z.
inline double phi_bar_drift(const AgentType& a, double t, double zbar) {
  const double k = a.coupling.kappa;
  switch (a.coupling.kind) {
    case CouplingKind::Proportional: return zbar;
    case CouplingKind::Power: return (1.0 - k) * zbar - 0.5 * k * (1.0 - k) * a.deltaZ.norm2(t);
    default: return a.coupling.bPhiBar(t);
  }
}

inline double phi_vol_W(const AgentType& a, double t) {
  switch (a.coupling.kind) {
    case CouplingKind::Proportional: return a.deltaZ.W(t);
    case CouplingKind::Power: return (1.0 - a.coupling.kappa) * a.deltaZ.W(t);
    default: return a.coupling.deltaPhi.W(t);
  }
}

inline double phi_vol_B(const AgentType& a, double t) {
  switch (a.coupling.kind) {
    case CouplingKind::Proportional: return a.deltaZ.B(t);
    case CouplingKind::Power: return (1.0 - a.coupling.kappa) * a.deltaZ.B(t);
    default: return a.coupling.deltaPhi.B(t);
  }
}

struct TimeGrid {
  double T = 1.0;
  std::size_t steps = 100;

  double dt() const { return steps == 0 ? 0.0 : T / double(steps); }
  double t(std::size_t k) const { return steps == 0 ? 0.0 : T * double(k) / double(steps); }
  std::size_t nodes() const { return steps + 1; }
};

struct Diagnostic {
  std::string field;
  std::string message;
};

class InvalidInput : public std::invalid_argument {
 public:
  InvalidInput(std::string what, std::vector<Diagnostic> d)
      : std::invalid_argument(std::move(what)), diagnostics(std::move(d)) {}
  std::vector<Diagnostic> diagnostics;
};

inline std::string describe(const std::vector<Diagnostic>& ds) {
  std::ostringstream os;
  for (std::size_t i = 0; i < ds.size(); ++i) os << (i ? "; " : "") << ds[i].field << ": " << ds[i].message;
  return os.str();
}

// Pure check of admissibility. An empty result means valid.
inline std::vector<Diagnostic> validate_agent(const AgentType& a) {
  std::vector<Diagnostic> out;
  auto bad = [&](const char* f, const std::string& m) { out.push_back({f, m}); };
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(a.alpha) || a.alpha <= 0.0) bad("alpha", "must be finite and positive");
  else if (std::abs(a.alpha - 1.0) < kAlphaBand) bad("alpha", "logarithmic case alpha = 1 is excluded");
  if (!finite(a.theta) || a.theta < 0.0 || a.theta > 1.0) bad("theta", "must lie in [0,1]");
  const StockParams& s = a.stock;
  if (!finite(s.mu) || !finite(s.nu) || !finite(s.sigma)) bad("stock", "parameters must be finite");
  else if (s.Sigma() <= 0.0) bad("stock", "sigma^2 + nu^2 must be positive");
  if (!a.deltaZ.w.well_formed() || !a.deltaZ.b.well_formed()) bad("deltaZ", "malformed schedule");
  if (!(a.x0 > 0.0) || !finite(a.x0)) bad("x0", "must be positive");
  if (!(a.z0 > 0.0) || !finite(a.z0)) bad("z0", "must be positive");
  switch (a.coupling.kind) {
    case CouplingKind::Free:
      if (!finite(a.lambda) || a.lambda < 1.0) bad("lambda", "must be >= 1");
      if (!(a.phi0 > 0.0) || !finite(a.phi0)) bad("phi0", "must be positive");
      if (!a.coupling.bPhiBar.well_formed()) bad("coupling.bPhiBar", "malformed schedule");
      if (!a.coupling.deltaPhi.w.well_formed() || !a.coupling.deltaPhi.b.well_formed())
        bad("coupling.deltaPhi", "malformed schedule");
      break;
    case CouplingKind::Proportional:
      if (!(a.coupling.K > 0.0) || !finite(a.coupling.K)) bad("coupling.K", "must be positive");
      break;
    case CouplingKind::Power:
      if (!finite(a.coupling.kappa) || a.coupling.kappa > 0.0) bad("coupling.kappa", "must be <= 0");
      break;
  }
  return out;
}

inline void require_valid(const AgentType& a) {
  auto d = validate_agent(a);
  if (!d.empty()) throw InvalidInput("invalid agent type: " + describe(d), d);
}

// Population-level checks used by the mean-field routines. Power couplings
// must share kappa and every agent must share the effective lambda.
inline std::vector<Diagnostic> validate_population(const std::vector<AgentType>& pop) {
  std::vector<Diagnostic> out;
  if (pop.empty()) {
    out.push_back({"population", "empty"});
    return out;
  }
  for (std::size_t i = 0; i < pop.size(); ++i)
    for (auto& d : validate_agent(pop[i])) out.push_back({"agent[" + std::to_string(i) + "]." + d.field, d.message});
  const double lam = effective_lambda(pop[0]);
  const bool power = pop[0].coupling.kind == CouplingKind::Power;
  bool lamMismatch = false, kappaMismatch = false;
  for (std::size_t i = 1; i < pop.size(); ++i) {
    lamMismatch |= effective_lambda(pop[i]) != lam;
    kappaMismatch |= (pop[i].coupling.kind == CouplingKind::Power) != power ||
                     (power && pop[i].coupling.kappa != pop[0].coupling.kappa);
  }
  if (lamMismatch) out.push_back({"lambda", "heterogeneous lambda across the population"});
  if (kappaMismatch) out.push_back({"coupling.kappa", "heterogeneous kappa across the population"});
  return out;
}

inline void require_valid(const std::vector<AgentType>& pop) {
  auto d = validate_population(pop);
  if (!d.empty()) throw InvalidInput("invalid population: " + describe(d), d);
}

// Ensemble average of f over the population.
template <class F>
double population_expectation(const std::vector<AgentType>& pop, F&& f) {
  if (pop.empty()) throw std::invalid_argument("population_expectation: empty population");
  double s = 0.0;
  for (const auto& a : pop) s += f(a);
  return s / double(pop.size());
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double at(double u) const { return lo + (hi - lo) * u; }
};

// Independent uniform draws for each type parameter. Degenerate ranges give
// fixed values. Alpha draws inside the excluded band around one are redrawn.
struct PopulationSpec {
  Range alpha{0.1, 3.0};
  Range theta{0.0, 1.0};
  Range mu{0.3, 0.3};
  Range nu{0.0, 0.0};
  Range sigma{1.0, 1.0};
  Range deltaZW{0.0, 0.0};
  Range deltaZB{0.5, 0.5};
  Range deltaPhiW{0.0, 0.0};
  Range deltaPhiB{0.0, 0.0};
  Range bPhiBar{0.0, 0.0};
  Range logRatio0{0.0, 0.0};  // log(phi0 / z0)
  double lambda = 1.0;
  CouplingKind coupling = CouplingKind::Free;
  double K = 1.0;
  double kappa = 0.0;
};

inline std::vector<AgentType> sample_population(const PopulationSpec& spec, std::size_t n, std::uint64_t seed) {
  const CounterRng rng(seed, RngDomain::Population);
  std::vector<AgentType> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t step = 0;
    auto u = [&]() {
      const auto p = rng.uniform2(i, step++);
      return p[0];
    };
    AgentType a;
    do {
      a.alpha = spec.alpha.at(u());
    } while (std::abs(a.alpha - 1.0) < kAlphaBand || a.alpha <= 0.0);
    a.theta = spec.theta.at(u());
    a.stock = {spec.mu.at(u()), spec.nu.at(u()), spec.sigma.at(u())};
    a.deltaZ = VolSchedule::constant(spec.deltaZW.at(u()), spec.deltaZB.at(u()));
    a.coupling.kind = spec.coupling;
    a.coupling.K = spec.K;
    a.coupling.kappa = spec.kappa;
    a.coupling.deltaPhi = VolSchedule::constant(spec.deltaPhiW.at(u()), spec.deltaPhiB.at(u()));
    a.coupling.bPhiBar = PiecewiseConstant::constant(spec.bPhiBar.at(u()));
    a.lambda = spec.lambda;
    a.phi0 = a.z0 * std::exp(spec.logRatio0.at(u()));
    out.push_back(a);
  }
  return out;
}

}  // namespace fwdrel
