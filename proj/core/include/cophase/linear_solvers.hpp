// SPDX-License-Identifier: Apache-2.0
//
// Linear null-space formulations. With partially coherent observations the
// unknowns satisfy two homogeneous linear systems:
//
//   Q x = 0,   Q = [B_c A_1 - B_1 A_c]_{c=2..C}            (M(C-1) x N)
//   R psi = 0, R = A A^+ B - B                              (CM x M)
//
// Both have a one-dimensional kernel once M(C-1) >= N-1 and the data are
// consistent, so the solution is the right singular vector of the smallest
// singular value. The ratio of the two smallest singular values and the
// spread of |psi_m| judge the reconstruction.
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "cophase/model.hpp"
#include "cophase/solve_report.hpp"

namespace cophase {

enum class SystemKind { Q, R };

struct NullSpaceSystem {
  SystemKind kind = SystemKind::Q;
  CMatrix matrix;
  /// R form: the group index of every column (all-zero groups are left out).
  std::vector<Index> groups;
  /// Q form: rows appended for all-zero groups.
  Index zero_group_rows = 0;
  /// R form: A was numerically rank deficient when building the projector.
  bool rank_warning = false;
};

struct KernelVector {
  CVector vector;  ///< unit 2-norm
  double sigma_min = 0.0;
  /// sigma_second / sigma_min; infinite when sigma_min is exactly zero.
  double gap = std::numeric_limits<double>::infinity();
};

enum class KernelMethod { ExactSvd, Iterative };

/// Gaps below this value mark a near-degenerate, unreliable kernel.
inline constexpr double kDegenerateGap = 10.0;

/// M(C-1) >= N-1, or with all-zero groups C*M - rk B >= N-1.
bool check_oversampling(Index unknowns, Index groups, Index coherent, Index zero_groups = 0);

/// Stacks B_c A_a - B_a A_c for every non-anchor block c of each group (a is
/// the group's anchor block, block 0 unless that observation is zero). An
/// all-zero group yields the C rows A_c x = 0 instead, scaled to the rms
/// observed magnitude; the extra row is appended after the M(C-1) block rows.
NullSpaceSystem build_q(const ForwardOperator& op, const PartialObservations& obs);

/// A A^+ B - B over the nonzero columns of B. A^+ B is obtained from a
/// column-pivoted QR least-squares solve.
NullSpaceSystem build_r(const ForwardOperator& op, const PartialObservations& obs);

/// Right singular vector for the smallest singular value. The iterative
/// route is a two-vector inverse subspace iteration on the normal matrix.
KernelVector smallest_singular_vector(const NullSpaceSystem& sys,
                                      KernelMethod method = KernelMethod::ExactSvd);
KernelVector smallest_singular_vector(const CMatrix& matrix,
                                      KernelMethod method = KernelMethod::ExactSvd);

/// Descending singular values of the system matrix.
RVector singular_values(const CMatrix& matrix);

struct PhaseRecovery {
  PhaseVector psi;
  /// stdev(|psi_m|) / mean(|psi_m|) over the determined groups.
  double fluctuation = 0.0;
  /// Real factor divided out of psi (and to be divided out of x).
  double scale = 1.0;
};

/// psi_m = mean over nonzero blocks of (A_c x)_m / [B_c]_mm, normalized so
/// that mean |psi_m| = 1. All-zero groups get psi_m = 1 and are flagged.
PhaseRecovery recover_phases(const ForwardOperator& op, const PartialObservations& obs,
                             const CVector& x);

/// Least-squares solution of A x = B psi.
CVector reconstruct_plain(const ForwardOperator& op, const PartialObservations& obs,
                          const PhaseVector& psi);

/// Least-squares solution of A x = B diag(|psi|)^{-1} psi.
CVector reconstruct_unit_constrained(const ForwardOperator& op, const PartialObservations& obs,
                                     const PhaseVector& psi);

/// Solves [R; w u_i^T] psi = w u_{CM+1} with w = ||B||_2 in the
/// least-squares sense, which pins psi_i = 1. `pin_group` is 0-based.
PhaseVector solve_pinned(const ForwardOperator& op, const PartialObservations& obs, Index pin_group);

/// kappa = ||R_pinned^+||_2 ||B||_2 = ||B||_2 / sigma_min(R_pinned).
double perturbation_bound(const ForwardOperator& op, const PartialObservations& obs, Index pin_group);

/// Spectral norm of a stacked B (its columns have disjoint supports).
double stacked_spectral_norm(const PartialObservations& obs);

enum class Reconstruction { Plain, UnitConstrained };

/// Q route: kernel vector of Q, then psi recovery and scaling of x.
SolveReport solve_nullspace_q(const ForwardOperator& op, const PartialObservations& obs,
                              KernelMethod method = KernelMethod::ExactSvd);

/// R route: kernel vector of R as psi, then x from A x = B psi.
SolveReport solve_nullspace_r(const ForwardOperator& op, const PartialObservations& obs,
                              Reconstruction reconstruction = Reconstruction::Plain,
                              KernelMethod method = KernelMethod::ExactSvd);

/// Fully coherent baseline: least-squares solution of A x = b.
SolveReport solve_complex_least_squares(const ForwardOperator& op, const CVector& b);

}  // namespace cophase
