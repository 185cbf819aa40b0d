// SPDX-License-Identifier: Apache-2.0
#include "cophase/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "cophase/csv.hpp"
#include "cophase/random.hpp"

namespace cophase {

namespace {

struct SolverEntry {
  SolverId id;
  std::string_view name;
};

constexpr std::array<SolverEntry, 9> kSolvers{{
    {SolverId::SvdQ, "svd-q"},
    {SolverId::SvdR, "svd-r"},
    {SolverId::SvdRUnit, "svd-r-unit"},
    {SolverId::ComplexLs, "complex-ls"},
    {SolverId::MagnitudeOnly, "mag-only"},
    {SolverId::FullPhase, "full-phase"},
    {SolverId::ReducedPhase, "reduced-phase"},
    {SolverId::EliminatedPhase, "eliminated"},
    {SolverId::Paulus, "paulus"},
}};

double max_group_norm(const CMatrix& coefficients) { return coefficients.rowwise().norm().maxCoeff(); }

}  // namespace

std::string_view solver_name(SolverId id) {
  for (const auto& entry : kSolvers) {
    if (entry.id == id) return entry.name;
  }
  return "unknown";
}

std::optional<SolverId> parse_solver(std::string_view name) {
  for (const auto& entry : kSolvers) {
    if (entry.name == name) return entry.id;
  }
  return std::nullopt;
}

std::vector<SolverId> all_solvers() {
  std::vector<SolverId> ids;
  for (const auto& entry : kSolvers) ids.push_back(entry.id);
  return ids;
}

bool is_linear(SolverId id) {
  return id == SolverId::SvdQ || id == SolverId::SvdR || id == SolverId::SvdRUnit;
}

std::vector<Index> ExperimentGrid::groups_for_ratios(Index unknowns, Index coherent,
                                                     const std::vector<double>& ratios) {
  if (unknowns < 1 || coherent < 1) throw InvalidArgument("grid needs N >= 1 and C >= 1");
  std::vector<Index> groups;
  groups.reserve(ratios.size());
  for (double r : ratios) {
    if (!(r > 0.0)) throw InvalidArgument("oversampling ratios must be positive");
    const auto m = static_cast<Index>(std::llround(r * static_cast<double>(unknowns) / static_cast<double>(coherent)));
    groups.push_back(std::max<Index>(1, m));
  }
  return groups;
}

GridPoint ExperimentGrid::point(std::size_t index) const {
  return GridPoint{unknowns, groups.at(index), coherent, noise};
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t point, std::size_t trial) {
  return derive_seed(master, static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(trial));
}

bool trial_success(double rd, double noise) {
  if (!std::isfinite(rd)) return false;
  return noise > 0.0 ? success(rd, noise) : rd <= kNoiseFreeSuccessRd;
}

ProblemInstance make_instance(ForwardOperator op, CVector xi, double noise, std::uint64_t noise_seed) {
  CVector b = forward_apply(op, xi);
  CVector b_noisy = add_noise(b, NoiseSpec{noise, noise_seed});
  PartialObservations obs = observe_partial(op, b_noisy);
  return ProblemInstance{std::move(op), std::move(xi), std::move(b), std::move(b_noisy), std::move(obs)};
}

ProblemInstance draw_gaussian_instance(const GridPoint& point, std::uint64_t seed) {
  const CoherenceLayout layout(point.groups, point.coherent);
  Rng matrix_rng(derive_seed(seed, 1));
  Rng solution_rng(derive_seed(seed, 2));
  ForwardOperator op(complex_gaussian_matrix(layout.observations(), point.unknowns, matrix_rng), layout);
  CVector xi = complex_gaussian_vector(point.unknowns, solution_rng);
  return make_instance(std::move(op), std::move(xi), point.noise, derive_seed(seed, 3));
}

SolveReport run_solver(SolverId id, const ProblemInstance& instance, const MinimizerConfig& config) {
  const auto& op = instance.op;
  const auto& obs = instance.obs;
  switch (id) {
    case SolverId::SvdQ: return solve_nullspace_q(op, obs);
    case SolverId::SvdR: return solve_nullspace_r(op, obs, Reconstruction::Plain);
    case SolverId::SvdRUnit: return solve_nullspace_r(op, obs, Reconstruction::UnitConstrained);
    case SolverId::ComplexLs: return solve_complex_least_squares(op, instance.b_noisy);
    case SolverId::MagnitudeOnly: return solve_nonlinear(CostKind::MagnitudeOnly, op, obs, config);
    case SolverId::FullPhase: return solve_nonlinear(CostKind::FullPhaseConstrained, op, obs, config);
    case SolverId::ReducedPhase: return solve_nonlinear(CostKind::ReducedPhase, op, obs, config);
    case SolverId::EliminatedPhase: return solve_nonlinear(CostKind::EliminatedPhase, op, obs, config);
    case SolverId::Paulus: return solve_nonlinear(CostKind::PaulusComparison, op, obs, config);
  }
  throw InvalidArgument("unknown solver");
}

TrialRecord score_trial(SolverId id, const ProblemInstance& instance, std::uint64_t seed,
                        const RunOptions& options) {
  TrialRecord record;
  record.solver = id;
  record.unknowns = instance.op.unknowns();
  record.groups = instance.op.layout().groups();
  record.coherent = instance.op.layout().coherent();
  record.noise = noise_to_signal(instance.b_noisy, instance.b);
  record.seed = seed;

  const auto start = std::chrono::steady_clock::now();
  try {
    const SolveReport report = run_solver(id, instance, options.minimizer);
    record.gap = report.gap;
    record.psi_fluctuation = report.psi_fluctuation;
    const double rd = relative_deviation(instance.op, report.x, instance.xi);
    if (std::isfinite(rd)) {
      record.rd = rd;
    } else {
      record.error = "non-finite solution";
    }
  } catch (const std::exception& e) {
    record.error = e.what();
  }
  if (options.record_time) {
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return record;
}

TrialRecord run_trial(const GridPoint& point, SolverId id, std::uint64_t seed, const RunOptions& options) {
  const ProblemInstance instance = draw_gaussian_instance(point, seed);
  TrialRecord record = score_trial(id, instance, seed, options);
  record.noise = point.noise;
  record.success = record.error.empty() && trial_success(record.rd, point.noise);
  return record;
}

SweepResult sweep_success(const ExperimentGrid& grid, const RunOptions& options) {
  if (grid.trials < 1) throw InvalidArgument("sweep needs at least one trial per point");
  if (grid.solvers.empty()) throw InvalidArgument("sweep needs at least one solver");
  const std::size_t points = grid.groups.size();
  const auto trials = static_cast<std::size_t>(grid.trials);
  const std::size_t solvers = grid.solvers.size();

  SweepResult result;
  result.trials.resize(points * trials * solvers);
  parallel_for(points * trials, options.threads, [&](std::size_t task) {
    const std::size_t p = task / trials;
    const std::size_t t = task % trials;
    const GridPoint point = grid.point(p);
    const std::uint64_t seed = trial_seed(grid.master_seed, p, t);
    const ProblemInstance instance = draw_gaussian_instance(point, seed);
    for (std::size_t s = 0; s < solvers; ++s) {
      TrialRecord record = score_trial(grid.solvers[s], instance, seed, options);
      record.noise = point.noise;
      record.success = record.error.empty() && trial_success(record.rd, point.noise);
      result.trials[task * solvers + s] = std::move(record);
    }
  });

  for (std::size_t p = 0; p < points; ++p) {
    const GridPoint point = grid.point(p);
    for (std::size_t s = 0; s < solvers; ++s) {
      Index successes = 0;
      for (std::size_t t = 0; t < trials; ++t) {
        successes += result.trials[(p * trials + t) * solvers + s].success ? 1 : 0;
      }
      result.rows.push_back(SweepRow{grid.solvers[s], point.unknowns, point.groups, point.coherent, point.noise,
                                     point.ratio(), grid.trials,
                                     static_cast<double>(successes) / static_cast<double>(trials)});
    }
  }
  return result;
}

RVector spectrum_dump(const NullSpaceSystem& sys) { return singular_values(sys.matrix); }

std::vector<NoiseBoundRow> noise_bound_study(const NoiseBoundConfig& config, const RunOptions& options) {
  if (config.trials < 1) throw InvalidArgument("noise bound study needs at least one trial");
  if (config.coherent < 2 || config.observations % config.coherent != 0) {
    throw InvalidArgument("C*M must be divisible by C >= 2");
  }
  const Index groups = config.observations / config.coherent;
  const CoherenceLayout layout(groups, config.coherent);
  const auto trials = static_cast<std::size_t>(config.trials);
  const std::size_t levels = config.noise_levels.size();

  std::vector<NoiseBoundRow> rows(levels * trials);
  parallel_for(levels * trials, options.threads, [&](std::size_t task) {
    const std::size_t level = task / trials;
    const std::size_t t = task % trials;
    NoiseBoundRow& row = rows[task];
    row.coherent = config.coherent;
    row.noise = config.noise_levels[level];
    row.trial = static_cast<Index>(t);
    row.seed = trial_seed(config.master_seed, level, t);

    Rng matrix_rng(derive_seed(row.seed, 1));
    Rng solution_rng(derive_seed(row.seed, 2));
    const ForwardOperator op(complex_gaussian_matrix(layout.observations(), config.unknowns, matrix_rng), layout);
    const CVector b = forward_apply(op, complex_gaussian_vector(config.unknowns, solution_rng));
    const PartialObservations clean = observe_partial(op, b);
    const PartialObservations noisy = observe_partial(op, add_noise(b, NoiseSpec{row.noise, derive_seed(row.seed, 3)}));

    try {
      const PhaseVector reference = solve_pinned(op, clean, config.pin_group);
      const double kappa = perturbation_bound(op, clean, config.pin_group);
      const double db = max_group_norm(noisy.coefficients() - clean.coefficients());
      row.bound = kappa * db / stacked_spectral_norm(clean);
      const PhaseVector perturbed = solve_pinned(op, noisy, config.pin_group);
      row.rel_error = (perturbed.values - reference.values).norm() / reference.values.norm();
      row.satisfied = row.rel_error <= row.bound;
    } catch (const Error&) {
      row.failed = true;
      row.rel_error = std::numeric_limits<double>::infinity();
    }
  });
  return rows;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "solver,N,M,C,n,seed,rd,success,gap,psi_fluct,seconds\n";
  for (const auto& r : records) {
    out << solver_name(r.solver) << ',' << r.unknowns << ',' << r.groups << ',' << r.coherent << ','
        << format_double(r.noise) << ',' << r.seed << ',' << format_double(r.rd) << ',' << (r.success ? 1 : 0)
        << ',' << format_double(r.gap) << ',' << format_double(r.psi_fluctuation) << ','
        << format_double(r.seconds) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "solver,N,M,C,n,ratio,trials,success_rate\n";
  for (const auto& r : rows) {
    out << solver_name(r.solver) << ',' << r.unknowns << ',' << r.groups << ',' << r.coherent << ','
        << format_double(r.noise) << ',' << format_double(r.ratio) << ',' << r.trials << ','
        << format_double(r.success_rate) << '\n';
  }
}

void write_spectrum_csv(std::ostream& out, const RVector& sigma) {
  out << "index,sigma\n";
  for (Index i = 0; i < sigma.size(); ++i) out << i << ',' << format_double(sigma[i]) << '\n';
}

void write_noise_bound_csv(std::ostream& out, const std::vector<NoiseBoundRow>& rows) {
  out << "C,n,trial,seed,rel_error,bound,satisfied\n";
  for (const auto& r : rows) {
    out << r.coherent << ',' << format_double(r.noise) << ',' << r.trial << ',' << r.seed << ','
        << format_double(r.rel_error) << ',' << format_double(r.bound) << ',' << (r.satisfied ? 1 : 0) << '\n';
  }
}

}  // namespace cophase
