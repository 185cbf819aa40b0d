// SPDX-License-Identifier: Apache-2.0
#include "cophase/antenna_scenario.hpp"

#include <cmath>

#include "cophase/random.hpp"

namespace cophase {

Index AntennaConfig::groups() const {
  if (unknowns < 1 || coherent < 1 || !(ratio > 0.0)) throw InvalidArgument("antenna config needs N, C, ratio > 0");
  return std::max<Index>(1, static_cast<Index>(std::llround(ratio * static_cast<double>(unknowns) /
                                                             static_cast<double>(coherent))));
}

ForwardOperator build_antenna_operator(const AntennaConfig& config) {
  ProbeArrayLayout probe;
  switch (config.coherent) {
    case 2: probe = ProbeArrayLayout::diagonal(config.probe_spacing); break;
    case 3: probe = ProbeArrayLayout::l_shape(config.probe_spacing); break;
    default: throw InvalidArgument("antenna scenario supports C = 2 or C = 3");
  }
  const DipoleSourceSet sources = build_source_sphere(config.source_diameter, config.unknowns);
  const MeasurementGrid grid = build_measurement_grid(config.measurement_diameter, config.groups());
  return build_dipole_operator(sources, grid, probe);
}

AntennaScenarioResult run_antenna_scenario(const AntennaConfig& config, const RunOptions& options) {
  if (config.trials < 1) throw InvalidArgument("antenna scenario needs at least one trial");
  if (config.solvers.empty()) throw InvalidArgument("antenna scenario needs at least one solver");
  AntennaScenarioResult result{build_antenna_operator(config), {}};
  const auto trials = static_cast<std::size_t>(config.trials);
  const std::size_t solvers = config.solvers.size();
  result.trials.resize(trials * solvers);

  parallel_for(trials, options.threads, [&](std::size_t t) {
    const std::uint64_t seed = trial_seed(config.seed, 0, t);
    Rng rng(derive_seed(seed, 2));
    CVector xi = complex_gaussian_vector(config.unknowns, rng);
    const ProblemInstance instance = make_instance(result.op, std::move(xi), config.noise, derive_seed(seed, 3));
    for (std::size_t s = 0; s < solvers; ++s) {
      TrialRecord record = score_trial(config.solvers[s], instance, seed, options);
      record.noise = config.noise;
      record.success = record.error.empty() && trial_success(record.rd, config.noise);
      result.trials[t * solvers + s] = std::move(record);
    }
  });
  return result;
}

}  // namespace cophase
