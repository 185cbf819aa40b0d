// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cophase/model.hpp"
#include "cophase/random.hpp"
#include "oracles.hpp"

using namespace cophase;

namespace {

const Complex kJ(0.0, 1.0);

ForwardOperator random_operator(Index groups, Index coherent, Index unknowns, std::uint64_t seed) {
  return ForwardOperator(oracle::gaussian(groups * coherent, unknowns, seed), CoherenceLayout(groups, coherent));
}

}  // namespace

TEST(CoherenceLayout, GroupsFollowBlockMajorRows) {
  const CoherenceLayout layout(3, 2);
  EXPECT_EQ(layout.observations(), 6);
  EXPECT_EQ(layout.members(0), (std::vector<Index>{0, 3}));
  EXPECT_EQ(layout.members(1), (std::vector<Index>{1, 4}));
  EXPECT_EQ(layout.members(2), (std::vector<Index>{2, 5}));
  for (Index row = 0; row < 6; ++row) EXPECT_EQ(layout.row(layout.group_of(row), layout.block_of(row)), row);
}

TEST(CoherenceLayout, GroupsPartitionTheRows) {
  const CoherenceLayout layout(4, 3);
  std::vector<int> seen(12, 0);
  for (Index m = 0; m < 4; ++m) {
    for (Index row : layout.members(m)) ++seen[static_cast<std::size_t>(row)];
  }
  for (int count : seen) EXPECT_EQ(count, 1);
}

TEST(CoherenceLayout, RejectsEmptyLayouts) {
  EXPECT_THROW(CoherenceLayout(0, 2), InvalidArgument);
  EXPECT_THROW(CoherenceLayout(2, 0), InvalidArgument);
}

TEST(ForwardOperator, RowCountMustMatchLayout) {
  EXPECT_THROW(ForwardOperator(CMatrix::Zero(5, 2), CoherenceLayout(3, 2)), DimensionError);
  const ForwardOperator op = random_operator(3, 2, 4, 1);
  EXPECT_EQ(op.block(1).rows(), 3);
  EXPECT_EQ(op.block(1)(0, 0), op.matrix()(3, 0));
}

TEST(ForwardApply, IdentityOperator) {
  const ForwardOperator op(CMatrix::Identity(3, 3), CoherenceLayout(3, 1));
  const CVector x = oracle::gaussian_vector(3, 2);
  EXPECT_EQ(forward_apply(op, x), x);
}

TEST(ForwardApply, OnesColumn) {
  const ForwardOperator op(CMatrix::Ones(2, 1), CoherenceLayout(1, 2));
  const CVector y = forward_apply(op, CVector::Ones(1));
  EXPECT_EQ(y, CVector::Ones(2));
}

TEST(ForwardApply, MatchesTripleLoop) {
  const ForwardOperator op = random_operator(3, 2, 4, 3);
  const CVector x = oracle::gaussian_vector(4, 4);
  const CVector expected = oracle::matvec(op.matrix(), x);
  EXPECT_LE((forward_apply(op, x) - expected).norm(), 1e-14 * expected.norm());
}

TEST(ForwardApply, DimensionErrorNamesLengths) {
  const ForwardOperator op = random_operator(3, 2, 4, 3);
  try {
    forward_apply(op, CVector::Zero(5));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_EQ(e.expected(), 4);
    EXPECT_EQ(e.actual(), 5);
  }
}

TEST(ObservePartial, EqualPhases) {
  CVector b(2);
  b << 1.0, 1.0;
  const auto obs = observe_partial(CoherenceLayout(1, 2), b);
  EXPECT_DOUBLE_EQ(obs.magnitudes()[0], 1.0);
  EXPECT_DOUBLE_EQ(obs.magnitudes()[1], 1.0);
  EXPECT_DOUBLE_EQ(obs.phase_differences()(0, 0), 0.0);
  EXPECT_EQ(obs.coefficients()(0, 0), Complex(1.0));
  EXPECT_EQ(obs.coefficients()(0, 1), Complex(1.0));
}

TEST(ObservePartial, QuadraturePair) {
  CVector b(2);
  b << 1.0, kJ;
  const auto obs = observe_partial(CoherenceLayout(1, 2), b);
  EXPECT_NEAR(obs.phase_differences()(0, 0), std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(std::abs(obs.coefficients()(0, 1) - kJ), 0.0, 1e-15);
}

TEST(ObservePartial, FigureOneOrderingPairsRows) {
  // N=4, M=3, C=2: pairs are rows (0,3), (1,4), (2,5).
  CVector b(6);
  b << 1.0, 2.0, 3.0, 1.0 * kJ, -2.0, 3.0 * std::exp(kJ * 0.25);
  const auto obs = observe_partial(CoherenceLayout(3, 2), b);
  EXPECT_NEAR(obs.phase_differences()(0, 0), std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(obs.phase_differences()(1, 0), std::numbers::pi, 1e-15);
  EXPECT_NEAR(obs.phase_differences()(2, 0), 0.25, 1e-15);
}

TEST(ObservePartial, CoefficientsMatchDefinition) {
  const CVector b = oracle::gaussian_vector(12, 5);
  const auto obs = observe_partial(CoherenceLayout(4, 3), b);
  const CMatrix expected = oracle::coefficients(b, 4, 3);
  EXPECT_LE((obs.coefficients() - expected).norm(), 1e-14 * expected.norm());
  for (Index m = 0; m < 4; ++m) {
    EXPECT_EQ(obs.coefficients()(m, 0).imag(), 0.0);
    for (Index c = 0; c < 3; ++c) EXPECT_NEAR(std::abs(obs.coefficients()(m, c)), std::abs(b[c * 4 + m]), 1e-14);
  }
}

TEST(ObservePartial, PhaseDifferencesWrapped) {
  const CVector b = oracle::gaussian_vector(200, 6);
  const auto obs = observe_partial(CoherenceLayout(100, 2), b);
  for (Index m = 0; m < 100; ++m) {
    const double d = obs.phase_differences()(m, 0);
    EXPECT_GT(d, -std::numbers::pi);
    EXPECT_LE(d, std::numbers::pi);
    EXPECT_NEAR(std::abs(std::polar(1.0, d) - std::polar(1.0, std::arg(b[100 + m] * std::conj(b[m])))), 0.0, 1e-13);
  }
}

TEST(ObservePartial, RoundTripUpToGroupPhase) {
  const CVector b = oracle::gaussian_vector(15, 7);
  const auto obs = observe_partial(CoherenceLayout(5, 3), b);
  const CVector psi = oracle::true_psi(b, 5);
  const CVector rebuilt = obs.stacked() * psi;
  EXPECT_LE((rebuilt - b).norm(), 1e-14 * b.norm());
}

TEST(ObservePartial, ZeroEntriesStorePlainZeros) {
  CVector b(6);
  b << 0.0, 1.0, 0.0, 2.0 * kJ, 0.0, 0.0;
  const auto obs = observe_partial(CoherenceLayout(3, 2), b);
  EXPECT_EQ(obs.coefficients()(0, 0), Complex(0.0));
  EXPECT_NEAR(std::abs(obs.coefficients()(0, 1)), 2.0, 1e-15);
  EXPECT_EQ(obs.phase_differences()(0, 0), 0.0);
  EXPECT_EQ(obs.coefficients()(1, 1), Complex(0.0));
  EXPECT_TRUE(obs.is_zero_group(2));
  EXPECT_EQ(obs.zero_groups(), 1);
  EXPECT_EQ(obs.rank(), 2);
  EXPECT_EQ(obs.anchor(0), 1);
}

TEST(ObservePartial, StackedColumnsHaveCNonzeros) {
  const CVector b = oracle::gaussian_vector(12, 8);
  const CMatrix stacked = observe_partial(CoherenceLayout(4, 3), b).stacked();
  for (Index m = 0; m < 4; ++m) {
    Index nonzero = 0;
    for (Index i = 0; i < 12; ++i) nonzero += stacked(i, m) != Complex(0.0) ? 1 : 0;
    EXPECT_EQ(nonzero, 3);
  }
}

TEST(ObservePartial, GlobalPhaseInvariance) {
  const CVector b = oracle::gaussian_vector(12, 9);
  const auto reference = observe_partial(CoherenceLayout(4, 3), b);
  for (double theta : {0.3, -2.0, 3.1}) {
    const auto rotated = observe_partial(CoherenceLayout(4, 3), std::exp(kJ * theta) * b);
    EXPECT_LE((rotated.magnitudes() - reference.magnitudes()).norm(), 1e-14);
    EXPECT_LE((rotated.coefficients() - reference.coefficients()).norm(), 1e-13);
  }
}

TEST(PhaseDiffFromMagnitudes, IdenticalObservations) {
  EXPECT_NEAR(phase_diff_from_magnitudes(1.0, 1.0, 2.0, std::sqrt(2.0)), 0.0, 1e-15);
}

TEST(PhaseDiffFromMagnitudes, QuadraturePair) {
  EXPECT_NEAR(phase_diff_from_magnitudes(1.0, 1.0, std::sqrt(2.0), 2.0), std::numbers::pi / 2, 1e-15);
}

TEST(PhaseDiffFromMagnitudes, MatchesComplexArgument) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 1000; ++i) {
    const Complex bk(normal(gen), normal(gen));
    const Complex bm(normal(gen), normal(gen));
    const double got = phase_diff_from_magnitudes(std::abs(bk), std::abs(bm), std::abs(bk + bm), std::abs(bk + kJ * bm));
    const double want = std::arg(bk * std::conj(bm));
    EXPECT_NEAR(std::abs(std::polar(1.0, got) - std::polar(1.0, want)), 0.0, 1e-12);
  }
}

TEST(PhaseDiffFromMagnitudes, UndefinedForTwoZeros) {
  EXPECT_THROW(phase_diff_from_magnitudes(0.0, 0.0, 0.0, 0.0), Error);
}

TEST(AddNoise, ZeroRatioIsIdentity) {
  const CVector b = oracle::gaussian_vector(10, 12);
  EXPECT_EQ(add_noise(b, NoiseSpec{0.0, 5}), b);
}

TEST(AddNoise, ExactRatio) {
  const CVector b = oracle::gaussian_vector(3000, 13);
  for (double n : {1e-6, 1e-3, 0.5}) {
    EXPECT_NEAR(noise_to_signal(add_noise(b, NoiseSpec{n, 21}), b), n, 1e-12 * n);
  }
}

TEST(AddNoise, DeterministicPerSeed) {
  const CVector b = oracle::gaussian_vector(50, 14);
  EXPECT_EQ(add_noise(b, NoiseSpec{1e-3, 4}), add_noise(b, NoiseSpec{1e-3, 4}));
  EXPECT_NE(add_noise(b, NoiseSpec{1e-3, 4}), add_noise(b, NoiseSpec{1e-3, 5}));
}

TEST(AddNoise, NegativeRatioRejected) {
  EXPECT_THROW(add_noise(CVector::Ones(3), NoiseSpec{-1.0, 0}), InvalidArgument);
}

TEST(NoiseToSignal, Definition) {
  const CVector b = oracle::gaussian_vector(8, 15);
  EXPECT_EQ(noise_to_signal(b, b), 0.0);
  EXPECT_NEAR(noise_to_signal(2.0 * b, b), 1.0, 1e-15);
  EXPECT_NEAR(noise_to_signal(1.5 * b, b), 0.5, 1e-15);
  EXPECT_THROW(noise_to_signal(b, CVector::Zero(8)), Error);
}

TEST(RelativeDeviation, ExactAndGauge) {
  const ForwardOperator op = random_operator(6, 2, 5, 16);
  const CVector xi = oracle::gaussian_vector(5, 17);
  EXPECT_LE(relative_deviation(op, xi, xi), 1e-15);
  for (double theta : {0.0, 1.0, -2.5}) {
    EXPECT_LE(relative_deviation(op, 2.0 * std::exp(kJ * theta) * xi, xi), 1e-14);
  }
  EXPECT_EQ(relative_deviation(op, CVector::Zero(5), xi), 1.0);
}

TEST(RelativeDeviation, OrthogonalImageGivesOne) {
  const ForwardOperator op = random_operator(6, 2, 5, 18);
  const CVector xi = oracle::gaussian_vector(5, 19);
  CVector x = oracle::gaussian_vector(5, 20);
  // Gram-Schmidt in the A-metric: make A x orthogonal to A xi.
  const CVector axi = oracle::matvec(op.matrix(), xi);
  const CVector ax = oracle::matvec(op.matrix(), x);
  x -= (axi.dot(ax) / axi.squaredNorm()) * xi;
  EXPECT_NEAR(relative_deviation(op, x, xi), 1.0, 1e-12);
}

TEST(RelativeDeviation, ZeroImageRejected) {
  const ForwardOperator op = random_operator(2, 2, 3, 22);
  EXPECT_THROW(relative_deviation(op, CVector::Ones(3), CVector::Zero(3)), Error);
}

TEST(Success, ThresholdIsThreeN) {
  EXPECT_TRUE(success(2e-4, 1e-4));
  EXPECT_FALSE(success(3.1e-4, 1e-4));
  EXPECT_TRUE(success(0.0, 1e-4));
}

TEST(PhaseVector, UnitCheckSkipsUndetermined) {
  PhaseVector psi{CVector::Ones(3), {false, false, true}};
  psi.values[2] = 5.0;
  EXPECT_TRUE(psi.is_unit(1e-12));
  psi.values[1] = 1.1;
  EXPECT_FALSE(psi.is_unit(1e-12));
}

TEST(TrueSolution, ImageIsForwardMap) {
  const ForwardOperator op = random_operator(4, 2, 3, 23);
  const auto truth = TrueSolution::from(op, oracle::gaussian_vector(3, 24));
  EXPECT_LE((truth.b - oracle::matvec(op.matrix(), truth.xi)).norm(), 1e-14 * truth.b.norm());
}
