// Command-line front end: simulate, verify, figures, validate.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fwdrel/config.hpp"

namespace {

int run(const std::string& verb, const std::string& path, const fwdrel::RunOptions& opt) {
  using fwdrel::json;
  static const std::map<std::string, std::string> scenarioFor{
      {"simulate", "simulate"}, {"verify", "verification_suite"}, {"figures", "paper_figures"}};
  json config;
  try {
    if (!path.empty()) config = fwdrel::read_config(path);
    else if (verb == "verify" || verb == "figures") config = json{{"scenario", scenarioFor.at(verb)}};
    else throw fwdrel::ConfigError("a config file is required for '" + verb + "'");
  } catch (const fwdrel::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  if (verb != "validate" && config.value("scenario", "") != scenarioFor.at(verb)) {
    std::cerr << "error: '" << verb << "' expects a config with \"scenario\": \"" << scenarioFor.at(verb) << "\"\n";
    return 2;
  }
  const fwdrel::RunResult res = fwdrel::run_scenario(config, opt);
  for (const auto& m : res.messages) std::cerr << m << '\n';
  for (const auto& r : res.reports)
    std::printf("%-7s %-50s statistic=%s stderr=%s\n", fwdrel::to_string(r.verdict), r.scenario.c_str(),
                fwdrel::format_double(r.statistic).c_str(), fwdrel::format_double(r.stderr_).c_str());
  if (!res.outDir.empty()) std::printf("wrote %zu files to %s\n", res.files.size(), res.outDir.c_str());
  return res.exitCode;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative-performance forward utility equilibria: simulation and verification"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config, out;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  app.add_option("--seed", seed, "override the configured seed");
  app.add_option("--threads", threads, "worker threads (outputs do not depend on this)")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output directory (overrides output_dir)");
  const std::pair<const char*, const char*> verbs[] = {
      {"simulate", "simulate consumption paths for a configured population"},
      {"verify", "run the verification suite"},
      {"figures", "emit the figure grids and trajectories"},
      {"validate", "check a configuration without running it"}};
  for (const auto& [name, help] : verbs) app.add_subcommand(name, help)->add_option("config", config, "JSON scenario file");
  CLI11_PARSE(app, argc, argv);
  fwdrel::RunOptions opt;
  if (app.count("--seed")) opt.seed = seed;
  opt.threads = threads;
  opt.outDir = out;
  const std::string verb = app.get_subcommands().front()->get_name();
  opt.validateOnly = verb == "validate";
  return run(verb, config, opt);
}
