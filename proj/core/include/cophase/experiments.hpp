// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo harness: Gaussian random instances, solver registry, success
// sweeps, singular spectra and the first-order noise bound study, all with
// CSV output. Every trial draws from its own counter-derived seed, so results
// are identical for any thread count.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cophase/linear_solvers.hpp"
#include "cophase/model.hpp"
#include "cophase/nonlinear_solvers.hpp"

namespace cophase {

enum class SolverId {
  SvdQ,             ///< "svd-q"
  SvdR,             ///< "svd-r"
  SvdRUnit,         ///< "svd-r-unit": R route with unit-magnitude psi
  ComplexLs,        ///< "complex-ls": fully coherent baseline
  MagnitudeOnly,    ///< "mag-only"
  FullPhase,        ///< "full-phase"
  ReducedPhase,     ///< "reduced-phase"
  EliminatedPhase,  ///< "eliminated"
  Paulus,           ///< "paulus"
};

std::string_view solver_name(SolverId id);
std::optional<SolverId> parse_solver(std::string_view name);
std::vector<SolverId> all_solvers();
bool is_linear(SolverId id);

struct GridPoint {
  Index unknowns = 0;
  Index groups = 0;
  Index coherent = 0;
  double noise = 0.0;

  double ratio() const noexcept {
    return static_cast<double>(coherent * groups) / static_cast<double>(unknowns);
  }
};

struct ExperimentGrid {
  Index unknowns = 0;
  Index coherent = 0;
  std::vector<Index> groups;
  double noise = 0.0;
  Index trials = 1;
  std::uint64_t master_seed = 0;
  std::vector<SolverId> solvers;

  /// M = max(1, round(ratio * N / C)) for every ratio.
  static std::vector<Index> groups_for_ratios(Index unknowns, Index coherent, const std::vector<double>& ratios);
  GridPoint point(std::size_t index) const;
};

/// seed = derive_seed(master, point, trial).
std::uint64_t trial_seed(std::uint64_t master, std::size_t point, std::size_t trial);

struct TrialRecord {
  SolverId solver = SolverId::SvdR;
  Index unknowns = 0;
  Index groups = 0;
  Index coherent = 0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  double rd = 1.0;
  bool success = false;
  double gap = 0.0;
  double psi_fluctuation = 0.0;
  double seconds = 0.0;
  /// Solver error message for failed trials.
  std::string error;
};

/// Noise-free trials count as successful below this relative deviation.
inline constexpr double kNoiseFreeSuccessRd = 1e-10;

/// success(rd, n) for n > 0, rd <= kNoiseFreeSuccessRd for n = 0.
bool trial_success(double rd, double noise);

struct ProblemInstance {
  ForwardOperator op;
  CVector xi;
  CVector b;
  CVector b_noisy;
  PartialObservations obs;
};

/// Forms b = A xi, contaminates it and extracts the partial observations.
ProblemInstance make_instance(ForwardOperator op, CVector xi, double noise, std::uint64_t noise_seed);

/// Gaussian A and xi for a grid point, all streams derived from `seed`.
ProblemInstance draw_gaussian_instance(const GridPoint& point, std::uint64_t seed);

/// Dispatches to the linear, non-linear or baseline solver.
SolveReport run_solver(SolverId id, const ProblemInstance& instance, const MinimizerConfig& config = {});

struct RunOptions {
  unsigned threads = 1;
  /// Record wall time; off by default so repeated runs give identical CSV.
  bool record_time = false;
  MinimizerConfig minimizer{};
};

/// Solves `instance` and scores the result; solver errors become failed
/// trials with rd = 1.
TrialRecord score_trial(SolverId id, const ProblemInstance& instance, std::uint64_t seed,
                        const RunOptions& options = {});

TrialRecord run_trial(const GridPoint& point, SolverId id, std::uint64_t seed, const RunOptions& options = {});

struct SweepRow {
  SolverId solver = SolverId::SvdR;
  Index unknowns = 0;
  Index groups = 0;
  Index coherent = 0;
  double noise = 0.0;
  double ratio = 0.0;
  Index trials = 0;
  double success_rate = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;      ///< point-major, then solver order
  std::vector<TrialRecord> trials;  ///< (point, trial, solver) order
};

/// All solvers of a trial share one instance, so their rates are paired.
SweepResult sweep_success(const ExperimentGrid& grid, const RunOptions& options = {});

/// Full singular spectrum of a null-space system, descending.
RVector spectrum_dump(const NullSpaceSystem& sys);

struct NoiseBoundRow {
  Index coherent = 0;
  double noise = 0.0;
  Index trial = 0;
  std::uint64_t seed = 0;
  double rel_error = 0.0;  ///< ||dpsi|| / ||psi||
  double bound = 0.0;      ///< kappa ||dB|| / ||B||
  bool satisfied = false;
  /// Pinned solve failed (degenerate system), e.g. for n around one.
  bool failed = false;
};

struct NoiseBoundConfig {
  Index unknowns = 40;
  Index observations = 100;  ///< C*M
  Index coherent = 2;
  std::vector<double> noise_levels{1e-4, 1e-3, 1e-2};
  Index trials = 1000;
  std::uint64_t master_seed = 0;
  Index pin_group = 0;
};

std::vector<NoiseBoundRow> noise_bound_study(const NoiseBoundConfig& config, const RunOptions& options = {});

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_spectrum_csv(std::ostream& out, const RVector& sigma);
void write_noise_bound_csv(std::ostream& out, const std::vector<NoiseBoundRow>& rows);

}  // namespace cophase
