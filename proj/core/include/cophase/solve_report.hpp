// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <optional>

#include "cophase/model.hpp"

namespace cophase {

/// Outcome of one reconstruction, linear or non-linear.
struct SolveReport {
  CVector x;
  PhaseVector psi;

  /// Null-space quality (linear solvers); NaN where not applicable.
  double sigma_min = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();

  /// Coefficient of variation of |psi_m|; large values flag a failure.
  double psi_fluctuation = std::numeric_limits<double>::quiet_NaN();

  /// Filled in when ground truth is known.
  std::optional<double> rd;

  /// Minimizer bookkeeping (non-linear solvers).
  double final_cost = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = true;

  /// False when the kernel is near-degenerate or a phase is undetermined.
  bool reliable = true;
};

}  // namespace cophase
