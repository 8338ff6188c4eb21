#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fsbc/commands.hpp"
#include "fsbc/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Free-surface Euler with surface tension: evolution, diagnostics and self-checks"};
  app.require_subcommand(1);
  std::string config_path, output;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON configuration file (defaults apply when omitted)");
  app.add_option("--output", output, "output directory (overrides output.directory)");
  app.add_option("--override", overrides, "KEY=VALUE with a dotted key, e.g. grid.nx=32")->allow_extra_args(false);

  auto* run = app.add_subcommand("run", "evolve and record diagnostics");
  auto* check = app.add_subcommand("check", "run the numerical self-checks");
  bool flat_only = false;
  std::string fault_check;
  double fault_magnitude = 1e-3;
  check->add_flag("--flat-only", flat_only, "only the psi = 0 checks, at 1e-12");
  check->add_option("--derivative-fault", fault_check, "corrupt the derivative inside the named check");
  check->add_option("--fault-magnitude", fault_magnitude, "relative size of the corruption");
  auto* dispersion = app.add_subcommand("dispersion", "measure linear capillary-wave frequencies");
  auto* report = app.add_subcommand("report", "summarise and reclassify a finished run");

  CLI11_PARSE(app, argc, argv);

  if (!output.empty()) overrides.push_back("output.directory=\"" + output + "\"");
  if (flat_only) overrides.emplace_back("check.flat_only=true");
  fsbc::Config cfg;
  try {
    cfg = config_path.empty() ? fsbc::parse_config_text("", overrides) : fsbc::parse_config(config_path, overrides);
  } catch (const fsbc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return fsbc::kExitConfig;
  } catch (const fsbc::SnapshotError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return fsbc::kExitConfig;
  }

  try {
    if (*run) return fsbc::cmd_run(cfg, &std::cout).exit_code;
    if (*check) {
      const auto r = fsbc::cmd_check(cfg, {fault_check, fault_check.empty() ? 0.0 : fault_magnitude});
      fsbc::print_check_report(std::cout, r);
      return r.passed() ? fsbc::kExitOk : fsbc::kExitFailure;
    }
    if (*dispersion) {
      const auto rows = fsbc::cmd_dispersion(cfg);
      fsbc::print_dispersion(std::cout, rows);
      for (const auto& r : rows)
        if (!r.converged) return fsbc::kExitFailure;
      return fsbc::kExitOk;
    }
    if (*report) return fsbc::cmd_report(cfg, std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fsbc::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fsbc::kExitFailure;
  }
  return fsbc::kExitFailure;
}
