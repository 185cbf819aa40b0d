// SPDX-License-Identifier: Apache-2.0
//
// Problem data model for phase retrieval with partially coherent
// observations: the forward operator, its block-coherent layout, the
// observations derived from a complex observation vector, and the metrics
// used to judge a reconstruction.
#pragma once

#include <cstdint>
#include <vector>

#include "cophase/types.hpp"

namespace cophase {

/// Block structure of C*M observations. Observations are stored block-major:
/// block c (0-based) owns rows [c*M, (c+1)*M). Group m owns the C rows
/// {m, m+M, ..., m+(C-1)M}; within a group the relative phases are known.
class CoherenceLayout {
 public:
  CoherenceLayout(Index groups, Index coherent);

  Index groups() const noexcept { return groups_; }
  Index coherent() const noexcept { return coherent_; }
  Index observations() const noexcept { return groups_ * coherent_; }

  /// Row of the observation taken by block `block` for group `group`.
  Index row(Index group, Index block) const noexcept { return block * groups_ + group; }
  Index group_of(Index row) const noexcept { return row % groups_; }
  Index block_of(Index row) const noexcept { return row / groups_; }

  std::vector<Index> members(Index group) const;

  friend bool operator==(const CoherenceLayout&, const CoherenceLayout&) = default;

 private:
  Index groups_;
  Index coherent_;
};

/// Dense linear map from N unknowns to the C*M observations of a layout.
class ForwardOperator {
 public:
  ForwardOperator(CMatrix matrix, CoherenceLayout layout);

  const CMatrix& matrix() const noexcept { return matrix_; }
  const CoherenceLayout& layout() const noexcept { return layout_; }
  Index unknowns() const noexcept { return matrix_.cols(); }
  Index observations() const noexcept { return matrix_.rows(); }

  /// The M x N rows belonging to block `c` (0-based).
  auto block(Index c) const { return matrix_.middleRows(c * layout_.groups(), layout_.groups()); }

 private:
  CMatrix matrix_;
  CoherenceLayout layout_;
};

/// Ground truth of a synthetic instance; `b` is the exact image of `xi`.
struct TrueSolution {
  CVector xi;
  CVector b;

  static TrueSolution from(const ForwardOperator& op, CVector xi);
};

/// Magnitudes and intra-group phase differences of a complex observation
/// vector, together with the diagonal blocks B_c built from them.
///
/// The diagonal entry of B_c for group m is |b_c|_m exp(j dphi), where dphi is
/// measured against the group's anchor: the first block with a nonzero
/// magnitude (block 0 whenever that entry is nonzero). Entries with zero
/// magnitude are stored as plain zeros, and a group whose entries all vanish
/// contributes a zero column to the stacked B.
class PartialObservations {
 public:
  const CoherenceLayout& layout() const noexcept { return layout_; }

  /// |b|, length C*M, block-major.
  const RVector& magnitudes() const noexcept { return magnitudes_; }

  /// M x (C-1) matrix of dphi_{m+cM,m} = arg(b_{m+cM}) - arg(b_m) in
  /// (-pi, pi]. Zero when either magnitude vanishes.
  const RMatrix& phase_differences() const noexcept { return phase_diffs_; }

  /// M x C matrix with column c holding the diagonal of B_c.
  const CMatrix& coefficients() const noexcept { return coefficients_; }
  CVector block_diagonal(Index c) const { return coefficients_.col(c); }

  /// Dense (C*M) x M stack [B_1; ...; B_C].
  CMatrix stacked() const;

  bool is_zero(Index row) const noexcept { return zero_[static_cast<std::size_t>(row)]; }
  /// Block index of the group's phase anchor, or -1 for an all-zero group.
  Index anchor(Index group) const noexcept { return anchors_[static_cast<std::size_t>(group)]; }
  bool is_zero_group(Index group) const noexcept { return anchor(group) < 0; }
  Index zero_groups() const noexcept;
  /// rk B: the number of groups with at least one nonzero observation.
  Index rank() const noexcept { return layout_.groups() - zero_groups(); }

  /// Magnitudes at or below this value count as zero.
  double zero_threshold() const noexcept { return zero_threshold_; }

  friend PartialObservations observe_partial(const CoherenceLayout& layout, const CVector& b);

 private:
  explicit PartialObservations(CoherenceLayout layout) : layout_(layout) {}

  CoherenceLayout layout_;
  RVector magnitudes_;
  RMatrix phase_diffs_;
  CMatrix coefficients_;
  std::vector<bool> zero_;
  std::vector<Index> anchors_;
  double zero_threshold_ = 0.0;
};

/// Reduced phase unknowns, one per coherent group (the phases of block 0).
struct PhaseVector {
  CVector values;
  /// Groups whose phase could not be determined (all observations zero).
  std::vector<bool> undetermined;

  Index size() const noexcept { return values.size(); }
  /// True when every determined entry satisfies ||psi_m| - 1| <= tol.
  bool is_unit(double tol) const;
};

struct NoiseSpec {
  double ratio = 0.0;
  std::uint64_t seed = 0;
};

/// Relative magnitude below which an observation counts as zero.
inline constexpr double kZeroMagnitudeRelTol = 1e-14;

CVector forward_apply(const ForwardOperator& op, const CVector& x);

PartialObservations observe_partial(const CoherenceLayout& layout, const CVector& b);
PartialObservations observe_partial(const ForwardOperator& op, const CVector& b);

/// Phase difference arg(b_k conj(b_m)) recovered from the four magnitudes
/// |b_k|, |b_m|, |b_k + b_m| and |b_k + j b_m|.
double phase_diff_from_magnitudes(double mag_k, double mag_m, double mag_sum, double mag_quad);

/// Returns b + db with complex Gaussian db rescaled so ||db|| = ratio * ||b||.
CVector add_noise(const CVector& b, const NoiseSpec& spec);

/// ||b' - b|| / ||b||.
double noise_to_signal(const CVector& b_prime, const CVector& b);

/// ||alpha A x - A xi|| / ||A xi|| with the complex scalar alpha chosen to
/// minimize the deviation; returns 1 for x = 0.
double relative_deviation(const ForwardOperator& op, const CVector& x, const CVector& xi);

/// A reconstruction succeeds when its relative deviation is below 3n.
bool success(double rd, double noise_ratio);

}  // namespace cophase
