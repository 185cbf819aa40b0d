// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "cophase/types.hpp"

namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
  std::vector<std::string> commands;
};

const std::vector<FlagSpec>& flag_specs() {
  static const std::vector<FlagSpec> specs{
      {"--N", "grid.N", "number of unknowns", {"sweep", "trial", "spectrum", "noise-bound", "antenna"}},
      {"--M", "grid.M", "number of coherent groups", {"trial", "spectrum"}},
      {"--C", "grid.C", "observations per coherent group", {"sweep", "trial", "spectrum", "noise-bound", "antenna"}},
      {"--ratios", "grid.ratios", "CM/N values, a:step:b (inclusive) or comma list", {"sweep"}},
      {"--reference-N", "grid.reference_N", "unscaled N, recorded as desk scale in the .meta file", {"sweep"}},
      {"--noise", "noise.n", "noise-to-signal ratio n", {"sweep", "trial", "spectrum", "antenna"}},
      {"--levels", "noise.levels", "comma list of noise ratios", {"noise-bound"}},
      {"--trials", "run.trials", "trials per point", {"sweep", "noise-bound", "antenna"}},
      {"--reference-trials", "run.reference_trials", "unscaled trial count for the .meta file", {"sweep"}},
      {"--seed", "run.seed", "master seed", {"sweep", "trial", "spectrum", "noise-bound", "antenna"}},
      {"--threads", "run.threads", "worker threads (default: COPHASE_THREADS or 1)",
       {"sweep", "trial", "noise-bound", "antenna"}},
      {"--solver", "solver.list", "comma list of solvers or 'all'", {"sweep", "trial", "antenna"}},
      {"--kind", "solver.kind", "null-space system, Q or R", {"spectrum"}},
      {"--pin", "solver.pin", "0-based pinned group", {"noise-bound"}},
      {"--max-iterations", "solver.max_iterations", "L-BFGS iteration cap", {"sweep", "trial", "antenna"}},
      {"--from-file", "input.operator", "CPLX1 operator file", {"trial", "spectrum"}},
      {"--obs", "input.observations", "CPLX1 complex observation vector", {"spectrum"}},
      {"--xi", "input.solution", "CPLX1 true solution vector", {"trial"}},
      {"--CM", "bound.observations", "total observations C*M", {"noise-bound"}},
      {"--ratio", "antenna.ratio", "CM/N", {"antenna"}},
      {"--source-diameter", "antenna.source_diameter", "source sphere diameter in wavelengths", {"antenna"}},
      {"--measurement-diameter", "antenna.measurement_diameter", "measurement sphere diameter in wavelengths",
       {"antenna"}},
      {"--spacing", "antenna.spacing", "probe element spacing in wavelengths", {"antenna"}},
      {"--out", "output.path", "CSV output path (default: stdout)", {"sweep", "trial", "spectrum", "noise-bound", "antenna"}},
      {"--trials-out", "output.trials", "per-trial CSV path", {"sweep"}},
      {"--export-operator", "output.operator", "write the dipole operator as CPLX1", {"antenna"}},
  };
  return specs;
}

const char* description(const std::string& command) {
  if (command == "sweep") return "success rate over a CM/N grid";
  if (command == "trial") return "single solve on a random or stored instance";
  if (command == "spectrum") return "singular spectrum of the Q or R system";
  if (command == "noise-bound") return "first-order perturbation bound study";
  return "synthetic dipole near-field scenario";
}

}  // namespace

int main(int argc, char** argv) {
  using cophase::cli::RunConfig;
  CLI::App app{"Phase retrieval from partially coherent observations"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* app = nullptr;
    std::string config_path;
    bool record_time = false;
    std::map<std::string, std::string> values;
  };
  std::map<std::string, Sub> subs;
  for (const auto& name : cophase::cli::command_names()) {
    Sub& sub = subs[name];
    sub.app = app.add_subcommand(name, description(name));
    sub.app->add_option("--config", sub.config_path, "key = value config file; flags override it");
    sub.app->add_flag("--record-time", sub.record_time, "record wall time per trial");
    for (const auto& spec : flag_specs()) {
      if (std::find(spec.commands.begin(), spec.commands.end(), name) == spec.commands.end()) continue;
      sub.app->add_option(spec.flag, sub.values[spec.key], spec.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  for (auto& [name, sub] : subs) {
    if (!sub.app->parsed()) continue;
    try {
      RunConfig config;
      if (!sub.config_path.empty()) config = RunConfig::load(sub.config_path);
      RunConfig flags;
      for (const auto& spec : flag_specs()) {
        auto* option = sub.app->get_option_no_throw(spec.flag);
        if (option != nullptr && option->count() > 0) flags.set(spec.key, sub.values[spec.key]);
      }
      if (sub.record_time) flags.set("run.record_time", "true");
      config.merge(flags);
      return cophase::cli::run_command(name, config, std::cout, std::cerr);
    } catch (const cophase::cli::UsageError& e) {
      std::cerr << "error: " << e.what() << "\n\n" << sub.app->help();
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}
