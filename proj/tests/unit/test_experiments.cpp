// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <sstream>

#include "cophase/experiments.hpp"
#include "oracles.hpp"

using namespace cophase;

namespace {

std::string sweep_csv(const ExperimentGrid& grid, unsigned threads) {
  RunOptions options;
  options.threads = threads;
  const SweepResult result = sweep_success(grid, options);
  std::ostringstream out;
  write_sweep_csv(out, result.rows);
  write_trials_csv(out, result.trials);
  return out.str();
}

}  // namespace

TEST(SolverRegistry, NamesRoundTrip) {
  for (SolverId id : all_solvers()) EXPECT_EQ(parse_solver(solver_name(id)), id);
  EXPECT_FALSE(parse_solver("bogus").has_value());
  EXPECT_EQ(all_solvers().size(), 9u);
  EXPECT_TRUE(is_linear(SolverId::SvdQ));
  EXPECT_FALSE(is_linear(SolverId::EliminatedPhase));
}

TEST(ExperimentGrid, GroupsForRatios) {
  const auto groups = ExperimentGrid::groups_for_ratios(30, 2, {1.0, 58.0 / 30.0, 3.0});
  EXPECT_EQ(groups, (std::vector<Index>{15, 29, 45}));
  EXPECT_THROW(ExperimentGrid::groups_for_ratios(30, 2, {0.0}), InvalidArgument);
}

TEST(TrialSeed, DistinctAndStable) {
  EXPECT_EQ(trial_seed(1, 2, 3), trial_seed(1, 2, 3));
  EXPECT_NE(trial_seed(1, 2, 3), trial_seed(1, 3, 2));
  EXPECT_NE(trial_seed(1, 2, 3), trial_seed(2, 2, 3));
}

TEST(RunTrial, NoiseFreeLinearSolverIsExact) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TrialRecord record = run_trial(GridPoint{30, 29, 2, 0.0}, SolverId::SvdR, seed);
    EXPECT_LE(record.rd, 1e-10);
    EXPECT_TRUE(record.success);
    EXPECT_TRUE(record.error.empty());
  }
}

TEST(RunTrial, SameSeedSameRecord) {
  const TrialRecord a = run_trial(GridPoint{20, 15, 2, 1e-3}, SolverId::EliminatedPhase, 42);
  const TrialRecord b = run_trial(GridPoint{20, 15, 2, 1e-3}, SolverId::EliminatedPhase, 42);
  EXPECT_EQ(a.rd, b.rd);
  EXPECT_EQ(std::isnan(a.gap), std::isnan(b.gap));
  if (!std::isnan(a.gap)) EXPECT_EQ(a.gap, b.gap);
  EXPECT_EQ(a.psi_fluctuation, b.psi_fluctuation);
  EXPECT_EQ(a.success, b.success);
}

TEST(RunTrial, UnderdeterminedFails) {
  for (SolverId id : {SolverId::SvdQ, SolverId::SvdR}) {
    EXPECT_FALSE(run_trial(GridPoint{30, 22, 2, 1e-4}, id, 1).success);
  }
}

TEST(RunTrial, SolverErrorsBecomeFailedTrials) {
  const TrialRecord record = run_trial(GridPoint{10, 8, 3, 1e-3}, SolverId::Paulus, 5);
  EXPECT_FALSE(record.success);
  EXPECT_EQ(record.rd, 1.0);
  EXPECT_NE(record.error.find("C=2"), std::string::npos);
}

TEST(TrialSuccess, NoiseFreeUsesAbsoluteThreshold) {
  EXPECT_TRUE(trial_success(1e-12, 0.0));
  EXPECT_FALSE(trial_success(1e-9, 0.0));
  EXPECT_TRUE(trial_success(2e-4, 1e-4));
  EXPECT_FALSE(trial_success(std::nan(""), 1e-4));
}

TEST(SweepSuccess, TransitionAroundThreshold) {
  ExperimentGrid grid{30, 2, ExperimentGrid::groups_for_ratios(30, 2, {1.8, 2.4}), 1e-4, 40, 9,
                      {SolverId::SvdQ, SolverId::SvdR}};
  const SweepResult result = sweep_success(grid);
  ASSERT_EQ(result.rows.size(), 4u);
  ASSERT_EQ(result.trials.size(), 2u * 40u * 2u);
  for (const auto& row : result.rows) {
    EXPECT_GE(row.success_rate, 0.0);
    EXPECT_LE(row.success_rate, 1.0);
    if (row.ratio < 1.9) EXPECT_LE(row.success_rate, 0.05);
    if (row.ratio > 2.3) EXPECT_GE(row.success_rate, 0.95);
  }
}

TEST(SweepSuccess, ThresholdMovesTowardOneWithC) {
  const auto rate = [](Index coherent) {
    ExperimentGrid grid{30, coherent, ExperimentGrid::groups_for_ratios(30, coherent, {1.4}), 1e-4, 20, 3,
                        {SolverId::SvdR}};
    return sweep_success(grid).rows.front().success_rate;
  };
  EXPECT_LE(rate(2), 0.05);
  EXPECT_GE(rate(6), 0.95);
}

TEST(SweepSuccess, ComplexBaselineAlwaysWorks) {
  ExperimentGrid grid{30, 2, ExperimentGrid::groups_for_ratios(30, 2, {1.0, 1.5, 2.0, 3.0}), 1e-4, 10, 4,
                      {SolverId::ComplexLs}};
  for (const auto& row : sweep_success(grid).rows) EXPECT_EQ(row.success_rate, 1.0);
}

TEST(SweepSuccess, MonotoneWithinSlack) {
  const Index trials = 40;
  ExperimentGrid grid{20, 2, ExperimentGrid::groups_for_ratios(20, 2, {1.6, 1.8, 2.0, 2.2, 2.4, 2.8}), 1e-4,
                      trials, 5, {SolverId::SvdQ, SolverId::SvdR}};
  const SweepResult result = sweep_success(grid);
  const double slack = 2.0 / std::sqrt(static_cast<double>(trials));
  for (std::size_t i = 2; i < result.rows.size(); ++i) {
    EXPECT_GE(result.rows[i].success_rate, result.rows[i - 2].success_rate - slack);
  }
}

TEST(SweepSuccess, ZeroTrialsRejected) {
  ExperimentGrid grid{10, 2, {10}, 1e-4, 0, 1, {SolverId::SvdR}};
  EXPECT_THROW(sweep_success(grid), InvalidArgument);
}

TEST(SweepSuccess, OutputIndependentOfThreadCount) {
  ExperimentGrid grid{12, 2, ExperimentGrid::groups_for_ratios(12, 2, {1.5, 2.5}), 1e-3, 6, 77,
                      {SolverId::SvdR, SolverId::EliminatedPhase}};
  EXPECT_EQ(sweep_csv(grid, 1), sweep_csv(grid, 3));
}

TEST(SpectrumDump, NoiseFreeKernelAndOrdering) {
  const ProblemInstance inst = draw_gaussian_instance(GridPoint{20, 15, 2, 0.0}, 3);
  const RVector sigma = spectrum_dump(build_r(inst.op, inst.obs));
  for (Index i = 1; i < sigma.size(); ++i) EXPECT_LE(sigma[i], sigma[i - 1]);
  EXPECT_LE(sigma[sigma.size() - 1], 1e-12 * sigma[0]);
}

TEST(SpectrumDump, DuplicateGroupGivesTwoSmallValues) {
  // M(C-1) = N-1, and group 0 observes the same row in both blocks, so its
  // Q row vanishes.
  const Index n = 9;
  CMatrix a = oracle::gaussian(16, n, 4);
  a.row(8) = a.row(0);
  const ForwardOperator op(a, CoherenceLayout(8, 2));
  const CVector xi = oracle::gaussian_vector(n, 5);
  const auto obs = observe_partial(op, oracle::matvec(a, xi));
  const NullSpaceSystem q = build_q(op, obs);
  EXPECT_EQ(oracle::nullity(q.matrix, 1e-12), 2);
  const RVector sigma = spectrum_dump(q);
  EXPECT_LE(sigma[n - 2], 1e-12 * sigma[0]);
}

TEST(NoiseBound, HoldsAtModerateNoise) {
  NoiseBoundConfig config;
  config.noise_levels = {1e-3};
  config.trials = 60;
  config.master_seed = 8;
  const auto rows = noise_bound_study(config);
  ASSERT_EQ(rows.size(), 60u);
  int satisfied = 0;
  for (const auto& row : rows) satisfied += row.satisfied ? 1 : 0;
  EXPECT_GE(satisfied, 59);
}

TEST(NoiseBound, LargeNoiseIsFailureRegime) {
  NoiseBoundConfig config;
  config.noise_levels = {1.0};
  config.trials = 20;
  const auto rows = noise_bound_study(config);
  double mean_error = 0.0;
  for (const auto& row : rows) mean_error += std::min(row.rel_error, 10.0) / 20.0;
  EXPECT_GT(mean_error, 0.3);
}

TEST(NoiseBound, RejectsIndivisibleLayout) {
  NoiseBoundConfig config;
  config.coherent = 3;
  EXPECT_THROW(noise_bound_study(config), InvalidArgument);
}

TEST(ParallelFor, CoversEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw Error("boom");
               }),
               Error);
}

TEST(Csv, Headers) {
  std::ostringstream trials;
  write_trials_csv(trials, {});
  EXPECT_EQ(trials.str(), "solver,N,M,C,n,seed,rd,success,gap,psi_fluct,seconds\n");
  std::ostringstream sweep;
  write_sweep_csv(sweep, {});
  EXPECT_EQ(sweep.str(), "solver,N,M,C,n,ratio,trials,success_rate\n");
  std::ostringstream spectrum;
  write_spectrum_csv(spectrum, RVector::Ones(2));
  EXPECT_EQ(spectrum.str(), "index,sigma\n0,1\n1,1\n");
}

TEST(Csv, TrialRowFormat) {
  TrialRecord r;
  r.solver = SolverId::SvdQ;
  r.unknowns = 30;
  r.groups = 29;
  r.coherent = 2;
  r.noise = 0.0;
  r.seed = 7;
  r.rd = 0.1;
  r.success = true;
  r.gap = std::numeric_limits<double>::infinity();
  std::ostringstream out;
  write_trials_csv(out, {r});
  EXPECT_NE(out.str().find("svd-q,30,29,2,0,7,0.10000000000000001,1,inf,0,0\n"), std::string::npos);
}
