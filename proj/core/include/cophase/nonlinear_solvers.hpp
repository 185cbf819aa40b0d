// SPDX-License-Identifier: Apache-2.0
//
// Non-convex cost functionals over the unknowns x (and, for the phase
// formulations, one angle per coherent group) and a limited-memory
// quasi-Newton minimizer over the real/imaginary stacking of x.
//
// Parameter layout of every functional: [Re x (N), Im x (N), theta (M)],
// where theta is present only for the phase formulations and encodes
// psi_m = exp(j theta_m), which removes the unit-modulus constraint.
#pragma once

#include <memory>
#include <string_view>

#include "cophase/model.hpp"
#include "cophase/solve_report.hpp"

namespace cophase {

enum class CostKind {
  MagnitudeOnly,         ///< || |Ax| - |b| ||
  FullPhaseConstrained,  ///< || Ax - diag(phi)|b| ||, phi from M angles and the observed dphi
  ReducedPhase,          ///< || Ax - B exp(j theta) ||
  EliminatedPhase,       ///< [ |A_1 x| - |b_1| ; A_c x - B_c B_1^{-1} A_1 x ]
  PaulusComparison,      ///< four-block magnitude residual, C = 2 only
};

std::string_view to_string(CostKind kind);

class CostFunctional {
 public:
  static CostFunctional make(CostKind kind, const ForwardOperator& op, const PartialObservations& obs);

  CostKind kind() const noexcept;
  Index unknowns() const noexcept;
  Index angle_count() const noexcept;
  Index parameter_count() const noexcept { return 2 * unknowns() + angle_count(); }

  /// Residual norm.
  double value(const RVector& params) const;
  /// Residual norm and its gradient (zero gradient at a zero residual).
  double value(const RVector& params, RVector& gradient) const;

  /// Half the squared residual norm, the quantity handed to the minimizer.
  /// `gradient` may be null.
  double objective(const double* params, double* gradient) const;

  RVector pack(const CVector& x, const RVector& angles = RVector()) const;
  CVector unpack_x(const RVector& params) const;
  RVector unpack_angles(const RVector& params) const;

  /// Group angles that best match x: theta_m = arg of the least-squares
  /// estimate of psi_m from the blocks of A x.
  RVector initial_angles(const CVector& x) const;

  /// Smoothing of |.| at zero: sqrt(|u|^2 + eps^2).
  double smoothing() const noexcept;
  /// Eliminated-phase rows dropped because their block-0 magnitude is zero.
  Index dropped_rows() const noexcept;
  /// ||b|| of the underlying observations.
  double observation_norm() const noexcept;

  struct Data;  // opaque

 private:
  explicit CostFunctional(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  std::shared_ptr<const Data> data_;
};

struct MinimizerConfig {
  int max_iterations = 5000;
  /// Relative to ||b||: stop once the max-norm of the objective gradient
  /// falls below gradient_tolerance * ||b||.
  double gradient_tolerance = 1e-10;
  int history_size = 10;
  double function_tolerance = 1e-15;
  double parameter_tolerance = 1e-15;
  /// Stop as soon as the residual norm reaches this value (0 disables).
  double stop_on_cost = 0.0;
};

/// Limited-memory BFGS with a Wolfe line search. Line-search failures return
/// the best iterate with `converged = false` rather than throwing.
SolveReport minimize(const CostFunctional& functional, const RVector& start, const MinimizerConfig& config = {});
/// Starts from x0; phase angles (when present) are derived from x0.
SolveReport minimize(const CostFunctional& functional, const CVector& x0, const MinimizerConfig& config = {});

struct SpectralInit {
  CVector x0;
  double eigenvalue = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Power iteration for the dominant eigenvector v of A^H diag(|b|^2) A,
/// scaled as x0 = v (|b|^T |A v|) / ||A v||^2.
SpectralInit spectral_initialization(const ForwardOperator& op, const PartialObservations& obs);

/// Spectral initialization followed by minimization of the chosen functional.
SolveReport solve_nonlinear(CostKind kind, const ForwardOperator& op, const PartialObservations& obs,
                            const MinimizerConfig& config = {});

}  // namespace cophase
