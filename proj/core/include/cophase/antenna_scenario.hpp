// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "cophase/antenna.hpp"
#include "cophase/experiments.hpp"

namespace cophase {

struct AntennaConfig {
  Index unknowns = 200;
  Index coherent = 3;  ///< 3: L-shaped probe, 2: diagonal pair
  double ratio = 3.0;  ///< CM/N, M = round(ratio N / C)
  double noise = 1e-3;
  Index trials = 50;
  std::uint64_t seed = 0;
  double source_diameter = 5.0;
  double measurement_diameter = 8.0;
  double probe_spacing = 1.0;
  std::vector<SolverId> solvers{SolverId::SvdR};

  Index groups() const;
};

/// Dipole operator for the configured geometry.
ForwardOperator build_antenna_operator(const AntennaConfig& config);

struct AntennaScenarioResult {
  ForwardOperator op;
  /// (trial, solver) order; every solver of a trial sees the same data.
  std::vector<TrialRecord> trials;
};

/// One random coefficient vector xi per trial against a fixed operator.
AntennaScenarioResult run_antenna_scenario(const AntennaConfig& config, const RunOptions& options = {});

}  // namespace cophase
