#pragma once
// JSON scenario configuration and run orchestration. The schema is described
// in docs/config.md.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fwdrel/figures.hpp"
#include "fwdrel/nplayer_nash.hpp"
#include "fwdrel/suite.hpp"

namespace fwdrel {

using json = nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace cfg {

inline void allow_keys(const json& j, const std::set<std::string>& keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("key '") + key + "': " + e.what());
  }
}

// A number, or {"knots": [...], "values": [...]}.
inline PiecewiseConstant schedule(const json& j, const std::string& where) {
  if (j.is_number()) return PiecewiseConstant::constant(j.get<double>());
  allow_keys(j, {"knots", "values"}, where);
  PiecewiseConstant p{j.value("knots", std::vector<double>{}), j.value("values", std::vector<double>{})};
  if (!p.well_formed()) throw ConfigError(where + ": values must have one more entry than knots, knots increasing");
  return p;
}

inline VolSchedule vol(const json& j, const std::string& where) {
  allow_keys(j, {"W", "B"}, where);
  VolSchedule v;
  if (j.contains("W")) v.w = schedule(j["W"], where + ".W");
  if (j.contains("B")) v.b = schedule(j["B"], where + ".B");
  return v;
}

inline AgentType agent(const json& j, const std::string& where) {
  allow_keys(j, {"alpha", "theta", "lambda", "mu", "nu", "sigma", "deltaZ", "coupling", "x0", "z0", "phi0"}, where);
  AgentType a;
  a.alpha = get(j, "alpha", a.alpha);
  a.theta = get(j, "theta", a.theta);
  a.lambda = get(j, "lambda", a.lambda);
  a.stock = {get(j, "mu", 0.0), get(j, "nu", 0.0), get(j, "sigma", 0.0)};
  if (j.contains("deltaZ")) a.deltaZ = vol(j["deltaZ"], where + ".deltaZ");
  a.x0 = get(j, "x0", 1.0);
  a.z0 = get(j, "z0", 1.0);
  a.phi0 = get(j, "phi0", 1.0);
  if (j.contains("coupling")) {
    const json& c = j["coupling"];
    allow_keys(c, {"kind", "K", "kappa", "bPhiBar", "deltaPhi"}, where + ".coupling");
    const std::string kind = get<std::string>(c, "kind", "free");
    if (kind == "free") a.coupling.kind = CouplingKind::Free;
    else if (kind == "proportional") a.coupling.kind = CouplingKind::Proportional;
    else if (kind == "power") a.coupling.kind = CouplingKind::Power;
    else throw ConfigError(where + ".coupling.kind: expected free, proportional or power");
    a.coupling.K = get(c, "K", 1.0);
    a.coupling.kappa = get(c, "kappa", 0.0);
    if (c.contains("bPhiBar")) a.coupling.bPhiBar = schedule(c["bPhiBar"], where + ".coupling.bPhiBar");
    if (c.contains("deltaPhi")) a.coupling.deltaPhi = vol(c["deltaPhi"], where + ".coupling.deltaPhi");
  }
  return a;
}

inline Range range(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), j.get<double>()};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError(where + ": expected a number or [lo, hi]");
}

// {"agents": [...]} or {"sample": {...}, "n": N, "seed": S}
inline std::vector<AgentType> population(const json& j, const std::string& where, std::uint64_t seed) {
  allow_keys(j, {"agents", "sample", "n", "seed"}, where);
  if (j.contains("agents")) {
    std::vector<AgentType> pop;
    for (std::size_t i = 0; i < j["agents"].size(); ++i)
      pop.push_back(agent(j["agents"][i], where + ".agents[" + std::to_string(i) + "]"));
    return pop;
  }
  if (!j.contains("sample")) throw ConfigError(where + ": need 'agents' or 'sample'");
  const json& s = j["sample"];
  allow_keys(s, {"alpha", "theta", "mu", "nu", "sigma", "deltaZW", "deltaZB", "deltaPhiW", "deltaPhiB", "bPhiBar",
                 "logRatio0", "lambda", "coupling", "K", "kappa"},
             where + ".sample");
  PopulationSpec p;
  auto r = [&](const char* k, Range& dst) {
    if (s.contains(k)) dst = range(s[k], where + ".sample." + k);
  };
  r("alpha", p.alpha);
  r("theta", p.theta);
  r("mu", p.mu);
  r("nu", p.nu);
  r("sigma", p.sigma);
  r("deltaZW", p.deltaZW);
  r("deltaZB", p.deltaZB);
  r("deltaPhiW", p.deltaPhiW);
  r("deltaPhiB", p.deltaPhiB);
  r("bPhiBar", p.bPhiBar);
  r("logRatio0", p.logRatio0);
  p.lambda = get(s, "lambda", p.lambda);
  const std::string kind = get<std::string>(s, "coupling", "free");
  p.coupling = kind == "power" ? CouplingKind::Power : kind == "proportional" ? CouplingKind::Proportional : CouplingKind::Free;
  p.K = get(s, "K", p.K);
  p.kappa = get(s, "kappa", p.kappa);
  return sample_population(p, get<std::size_t>(j, "n", 100), get<std::uint64_t>(j, "seed", derive_seed(seed, "population")));
}

inline TimeGrid grid(const json& j, TimeGrid g) {
  allow_keys(j, {"T", "steps"}, "grid");
  g.T = get(j, "T", g.T);
  g.steps = get(j, "steps", g.steps);
  if (!(g.T >= 0.0) || (g.steps == 0 && g.T > 0.0)) throw ConfigError("grid: T must be >= 0 and steps > 0");
  return g;
}

inline KappaDrift drift(const json& j, const char* key) {
  const std::string d = get<std::string>(j, key, "displayed");
  if (d == "displayed") return KappaDrift::Displayed;
  if (d == "ito") return KappaDrift::ItoConsistent;
  throw ConfigError(std::string(key) + ": expected 'displayed' or 'ito'");
}

inline FigureConfig figures(const json& j, std::uint64_t seed) {
  FigureConfig c = default_figure_config();
  c.seed = derive_seed(seed, "figures");
  if (j.is_null()) return c;
  allow_keys(j, {"alpha", "theta", "mu", "sigma", "nu", "deltaZB", "pop_inv_alpha", "pop_theta", "K_pos", "ElogK_pos",
                 "K_neg", "ElogK_neg", "kappa", "q_deltas", "asymptotic_delta", "trajectory_delta", "trajectory_grid",
                 "trajectories", "c0", "drift"},
             "figures");
  auto axis = [&](const char* k, std::vector<double>& dst) {
    if (!j.contains(k)) return;
    const json& a = j[k];
    allow_keys(a, {"lo", "hi", "n"}, std::string("figures.") + k);
    dst = linspace(a.at("lo").get<double>(), a.at("hi").get<double>(), a.at("n").get<std::size_t>());
  };
  axis("alpha", c.alphas);
  axis("theta", c.thetas);
  c.mu = get(j, "mu", c.mu);
  c.sigma = get(j, "sigma", c.sigma);
  c.nu = get(j, "nu", c.nu);
  c.deltaZB = get(j, "deltaZB", c.deltaZB);
  c.popInvAlpha = get(j, "pop_inv_alpha", c.popInvAlpha);
  c.popTheta = get(j, "pop_theta", c.popTheta);
  c.Kpos = get(j, "K_pos", c.Kpos);
  c.ElogKpos = get(j, "ElogK_pos", c.ElogKpos);
  c.Kneg = get(j, "K_neg", c.Kneg);
  c.ElogKneg = get(j, "ElogK_neg", c.ElogKneg);
  c.kappa = get(j, "kappa", c.kappa);
  c.qDeltas = get(j, "q_deltas", c.qDeltas);
  c.asymptoticDelta = get(j, "asymptotic_delta", c.asymptoticDelta);
  c.trajectoryDelta = get(j, "trajectory_delta", c.trajectoryDelta);
  if (j.contains("trajectory_grid")) c.trajectoryGrid = grid(j["trajectory_grid"], c.trajectoryGrid);
  if (j.contains("trajectories")) {
    c.trajectories.clear();
    for (const auto& t : j["trajectories"]) {
      allow_keys(t, {"name", "alpha", "theta"}, "figures.trajectories[]");
      c.trajectories.push_back({t.at("name").get<std::string>(), t.at("alpha").get<double>(), t.at("theta").get<double>()});
    }
  }
  c.c0 = get(j, "c0", c.c0);
  c.drift = drift(j, "drift");
  return c;
}

}  // namespace cfg

struct RunOptions {
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string outDir;  // empty: take from config
  bool validateOnly = false;
};

struct RunResult {
  int exitCode = 0;
  std::string outDir;
  std::vector<std::string> files;
  std::vector<std::string> messages;
  std::vector<ResidualReport> reports;
};

inline json to_json(const ResidualReport& r) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); };
  return json{{"scenario", r.scenario}, {"seed", r.seed},         {"paths", r.paths},
              {"statistic", num(r.statistic)}, {"stderr", num(r.stderr_)}, {"threshold", num(r.threshold)},
              {"verdict", to_string(r.verdict)}, {"note", r.note}};
}

inline json parse_config(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

inline json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace detail {

class RunWriter {
 public:
  RunWriter(std::string dir, RunResult& res) : dir_(std::move(dir)), res_(res) {
    std::filesystem::create_directories(dir_);
  }
  std::ofstream open(const std::string& rel) {
    const std::filesystem::path p = std::filesystem::path(dir_) / rel;
    std::filesystem::create_directories(p.parent_path());
    res_.files.push_back(rel);
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
  }

 private:
  std::string dir_;
  RunResult& res_;
};

inline json run_figures(const json& config, std::uint64_t seed, RunWriter& w, RunResult& res) {
  const FigureConfig fc = cfg::figures(config.value("figures", json()), seed);
  const std::vector<GridTable> tables = emit_all_figures(fc);
  std::vector<std::string> log;
  std::size_t nanCells = 0;
  for (const auto& t : tables) {
    auto os = w.open(t.name + ".csv");
    write_csv(os, t);
    for (const auto& r : t.rows)
      for (double v : r) nanCells += std::isnan(v);
    log.insert(log.end(), t.log.begin(), t.log.end());
  }
  {
    const auto pop = figure_population(fc, fc.deltaZB);
    json traj = json::array();
    for (const auto& t : fc.trajectories) traj.push_back({{"name", t.name}, {"alpha", t.alpha}, {"theta", t.theta}});
    const json params{{"mu", fc.mu},
                      {"sigma", fc.sigma},
                      {"nu", fc.nu},
                      {"deltaZB", fc.deltaZB},
                      {"E_inv_alpha", population_expectation(pop, [](const AgentType& a) { return 1.0 / a.alpha; })},
                      {"E_theta", population_expectation(pop, [](const AgentType& a) { return a.theta; })},
                      {"K_pos", fc.Kpos},
                      {"ElogK_pos", fc.ElogKpos},
                      {"K_neg", fc.Kneg},
                      {"ElogK_neg", fc.ElogKneg},
                      {"kappa", fc.kappa},
                      {"q_deltas", fc.qDeltas},
                      {"trajectory_delta", fc.trajectoryDelta},
                      {"trajectories", traj},
                      {"drift", fc.drift == KappaDrift::Displayed ? "displayed" : "ito"}};
    auto os = w.open("parameters.json");
    os << params.dump(2) << '\n';
  }
  {
    auto os = w.open("figures.log");
    for (const auto& l : log) os << l << '\n';
  }
  const FigureChecks chk = check_figures(fc, tables[0]);
  ResidualReport sign{"figures:k_sign_law", seed, 0, double(chk.signViolations), 0.0, 0.0,
                      chk.signLaw ? Verdict::Pass : Verdict::Fail, "grid points violating sign K = sign(alpha - 1)"};
  ResidualReport dis{"figures:q_regime_disagreement", seed, 0, chk.disagreementFound ? chk.disagreeBA : 0.0, 0.0, 0.0,
                     chk.disagreementFound ? Verdict::Pass : Verdict::Fail,
                     chk.disagreementFound ? "alpha=" + format_double(chk.disagreeAlpha) + " theta=" +
                                                 format_double(chk.disagreeTheta) + " deltaZB=" +
                                                 format_double(chk.disagreeDelta) + " benchmark b^A=" +
                                                 format_double(chk.disagreeBenchBA)
                                           : "no point with q > 0 under volatility and positive benchmark level"};
  res.reports.push_back(sign);
  res.reports.push_back(dis);
  return json{{"nan_cells", nanCells}, {"log_lines", log.size()}};
}

inline json run_verification(const json& config, std::uint64_t seed, unsigned threads, RunWriter& w, RunResult& res) {
  if (config.contains("verification")) cfg::allow_keys(config["verification"], {}, "verification");
  const SuiteResult s = run_verification_suite({seed, threads});
  res.reports.insert(res.reports.end(), s.reports.begin(), s.reports.end());
  {
    auto os = w.open("convergence.csv");
    os << "dt,error,stderr\n";
    for (const auto& r : s.convergence.rows)
      os << format_double(r.dt) << ',' << format_double(r.error) << ',' << format_double(r.stderr_) << '\n';
  }
  {
    auto os = w.open("extinction.csv");
    os << "T,fraction\n";
    for (std::size_t i = 0; i < s.extinction.horizons.size(); ++i)
      os << format_double(s.extinction.horizons[i]) << ',' << format_double(s.extinction.fractions[i]) << '\n';
  }
  return json{{"fitted_order", s.convergence.order},
              {"gamma_shape", s.gamma.coefficients.gamma_shape()},
              {"gamma_scale", s.gamma.coefficients.gamma_scale()}};
}

inline void write_path(RunWriter& w, const std::string& stem, const ProcessPath& p) {
  {
    auto os = w.open(stem + ".csv");
    write_path_csv(os, p);
  }
  auto os = w.open(stem + ".bin");
  write_path_binary(os, p);
}

inline json run_simulate(const json& config, std::uint64_t seed, unsigned threads, RunWriter& w, RunResult&) {
  const json& s = config.at("simulate");
  cfg::allow_keys(s, {"model", "grid", "population", "agent", "paths", "drift", "c0"}, "simulate");
  const std::string model = cfg::get<std::string>(s, "model", "meanfield");
  const TimeGrid g = cfg::grid(s.value("grid", json::object()), {1.0, 1000});
  const std::size_t paths = cfg::get<std::size_t>(s, "paths", 1);
  const std::uint64_t pseed = derive_seed(seed, "simulate");
  if (!s.contains("population")) throw ConfigError("simulate.population is required");
  const std::vector<AgentType> pop = cfg::population(s["population"], "simulate.population", seed);
  if (model == "meanfield") {
    const MFCoefficientTable tab = mf_coefficient_table(pop, g);
    for (std::size_t p = 0; p < paths; ++p) {
      const PathBundle b = generate_bundle(g, pop.size(), pseed, p);
      std::vector<ProcessPath> cs(pop.size());
      parallel_for(pop.size(), threads, [&](std::size_t j) { cs[j] = mf_consumption_path(pop[j], pop, tab, b, j); });
      for (std::size_t j = 0; j < pop.size(); ++j)
        write_path(w, "paths/outer" + std::to_string(p) + "_agent" + std::to_string(j) + "_c", cs[j]);
    }
    return json{{"model", model}, {"agents", pop.size()}};
  }
  if (model == "power") {
    if (!s.contains("agent")) throw ConfigError("simulate.agent is required for the power model");
    PowerScenario ps;
    ps.agent = cfg::agent(s["agent"], "simulate.agent");
    ps.population = pop;
    ps.grid = g;
    ps.paths = paths;
    ps.seed = pseed;
    ps.drift = cfg::drift(s, "drift");
    ps.threads = threads;
    const KappaCoefficients kc = kappa_coefficients(ps.agent, ps.population, 0.0, ps.drift);
    ps.c0 = cfg::get(s, "c0", 1.0);
    const std::vector<ProcessPath> cs = power_paths(ps);
    for (std::size_t p = 0; p < cs.size(); ++p) write_path(w, "paths/path" + std::to_string(p) + "_c", cs[p]);
    return json{{"model", model}, {"bA", kc.bA}, {"q", format_double(kc.q())}};
  }
  if (model == "nplayer") {
    for (std::size_t p = 0; p < paths; ++p) {
      const NashSimulation sim = simulate_nash_consumption(pop, generate_bundle(g, pop.size(), pseed, p));
      for (std::size_t i = 0; i < pop.size(); ++i)
        write_path(w, "paths/outer" + std::to_string(p) + "_agent" + std::to_string(i) + "_c", sim.c[i]);
    }
    return json{{"model", model}, {"agents", pop.size()}};
  }
  throw ConfigError("simulate.model: expected meanfield, power or nplayer");
}

inline std::vector<Diagnostic> validate_config(const json& config, std::uint64_t seed) {
  std::vector<Diagnostic> d;
  const std::string scen = config.value("scenario", "");
  if (scen == "simulate") {
    const json& s = config.at("simulate");
    const std::vector<AgentType> pop = cfg::population(s.at("population"), "simulate.population", seed);
    const std::string model = s.value("model", "meanfield");
    auto add = [&](const std::vector<Diagnostic>& v) { d.insert(d.end(), v.begin(), v.end()); };
    if (model == "nplayer") {
      add(validate_population(pop));
      try {
        check_nash_regime(pop);
      } catch (const std::exception& e) {
        d.push_back({"regime", e.what()});
      }
    } else {
      add(validate_population(pop));
    }
    if (s.contains("agent")) add(validate_agent(cfg::agent(s["agent"], "simulate.agent")));
  } else if (scen == "paper_figures") {
    cfg::figures(config.value("figures", json()), seed);
  } else if (scen != "verification_suite") {
    d.push_back({"scenario", "expected paper_figures, verification_suite or simulate"});
  }
  return d;
}

}  // namespace detail

// Runs a configured scenario and writes its outputs plus manifest.json.
// Exit codes: 0 success, 1 a check failed, 2 invalid configuration or input.
inline RunResult run_scenario(json config, const RunOptions& opt) {
  RunResult res;
  try {
    cfg::allow_keys(config, {"scenario", "seed", "output_dir", "figures", "verification", "simulate"}, "config");
    if (opt.seed) config["seed"] = *opt.seed;
    const std::uint64_t seed = cfg::get<std::uint64_t>(config, "seed", 20261014);
    config["seed"] = seed;
    const std::string scen = cfg::get<std::string>(config, "scenario", "");
    const std::vector<Diagnostic> diag = detail::validate_config(config, seed);
    for (const auto& d : diag) res.messages.push_back(d.field + ": " + d.message);
    if (!diag.empty()) {
      res.exitCode = 2;
      return res;
    }
    if (opt.validateOnly) {
      res.messages.push_back("configuration is valid");
      return res;
    }
    res.outDir = opt.outDir.empty() ? cfg::get<std::string>(config, "output_dir", "out/" + scen) : opt.outDir;
    detail::RunWriter w(res.outDir, res);
    json summary;
    if (scen == "paper_figures") summary = detail::run_figures(config, seed, w, res);
    else if (scen == "verification_suite") summary = detail::run_verification(config, seed, opt.threads, w, res);
    else summary = detail::run_simulate(config, seed, opt.threads, w, res);
    json reports = json::array();
    bool fail = false;
    for (const auto& r : res.reports) {
      reports.push_back(to_json(r));
      fail |= r.verdict == Verdict::Fail;
    }
    {
      auto os = w.open("report.json");
      os << json{{"summary", summary}, {"reports", reports}}.dump(2) << '\n';
    }
    json hashed = config;
    hashed.erase("output_dir");
    std::vector<std::string> files = res.files;
    files.push_back("manifest.json");
    std::sort(files.begin(), files.end());
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)fnv1a64(hashed.dump()));
    const json manifest{{"tool", "fwdrel"}, {"version", kVersion}, {"scenario", scen}, {"seed", seed},
                        {"config_hash", hex},  {"files", files},    {"verdict", fail ? "FAIL" : "PASS"}};
    {
      auto os = w.open("manifest.json");
      os << manifest.dump(2) << '\n';
    }
    res.files = files;
    res.exitCode = fail ? 1 : 0;
  } catch (const ConfigError& e) {
    res.messages.push_back(std::string("config error: ") + e.what());
    res.exitCode = 2;
  } catch (const InvalidInput& e) {
    res.messages.push_back(e.what());
    res.exitCode = 2;
  } catch (const RegimeViolation& e) {
    res.messages.push_back(e.what());
    res.exitCode = 2;
  } catch (const json::exception& e) {
    res.messages.push_back(std::string("config error: ") + e.what());
    res.exitCode = 2;
  }
  return res;
}

}  // namespace fwdrel
