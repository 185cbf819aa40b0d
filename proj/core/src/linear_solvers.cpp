// SPDX-License-Identifier: Apache-2.0
#include "cophase/linear_solvers.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "cophase/random.hpp"

namespace cophase {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// Condition numbers above 1/(1e3 eps) count as numerically singular.
constexpr double kSingularCondition = 1.0 / (1e3 * kEps);

constexpr int kIterativeCap = 1000;
constexpr std::uint64_t kIterativeSeed = 0x6b65726e656cULL;

Eigen::ColPivHouseholderQR<CMatrix> factor(const CMatrix& matrix) {
  Eigen::ColPivHouseholderQR<CMatrix> qr(matrix);
  qr.setThreshold(1e3 * kEps);
  return qr;
}

double rms_nonzero_magnitude(const PartialObservations& obs) {
  double sum = 0.0;
  Index count = 0;
  for (Index i = 0; i < obs.magnitudes().size(); ++i) {
    if (obs.is_zero(i)) continue;
    sum += obs.magnitudes()[i] * obs.magnitudes()[i];
    ++count;
  }
  return count > 0 ? std::sqrt(sum / static_cast<double>(count)) : 1.0;
}

std::vector<Index> nonzero_groups(const PartialObservations& obs) {
  std::vector<Index> groups;
  for (Index m = 0; m < obs.layout().groups(); ++m) {
    if (!obs.is_zero_group(m)) groups.push_back(m);
  }
  return groups;
}

// B psi without forming the dense stack.
CVector stacked_times(const PartialObservations& obs, const CVector& psi) {
  const CoherenceLayout& layout = obs.layout();
  CVector out(layout.observations());
  for (Index c = 0; c < layout.coherent(); ++c) {
    for (Index m = 0; m < layout.groups(); ++m) out[layout.row(m, c)] = obs.coefficients()(m, c) * psi[m];
  }
  return out;
}

CMatrix pinned_matrix(const ForwardOperator& op, const PartialObservations& obs, Index pin_group) {
  if (pin_group < 0 || pin_group >= obs.layout().groups()) {
    throw InvalidArgument("pin index " + std::to_string(pin_group) + " outside [0, " +
                          std::to_string(obs.layout().groups()) + ")");
  }
  if (obs.is_zero_group(pin_group)) throw InvalidArgument("cannot pin the phase of an all-zero group");
  const NullSpaceSystem sys = build_r(op, obs);
  const Index cols = sys.matrix.cols();
  // Pin row weighted by ||B||_2 so the system is invariant under b -> s b.
  const double weight = obs.coefficients().rowwise().norm().maxCoeff();
  CMatrix pinned = CMatrix::Zero(sys.matrix.rows() + 1, cols);
  pinned.topRows(sys.matrix.rows()) = sys.matrix;
  for (Index j = 0; j < cols; ++j) {
    if (sys.groups[static_cast<std::size_t>(j)] == pin_group) pinned(sys.matrix.rows(), j) = weight;
  }
  return pinned;
}

struct Spread {
  double mean = 0.0;
  double stdev = 0.0;
};

Spread magnitude_spread(const PhaseVector& psi) {
  double sum = 0.0;
  Index count = 0;
  for (Index m = 0; m < psi.size(); ++m) {
    if (psi.undetermined[static_cast<std::size_t>(m)]) continue;
    sum += std::abs(psi.values[m]);
    ++count;
  }
  if (count == 0) return {};
  const double mean = sum / static_cast<double>(count);
  double var = 0.0;
  for (Index m = 0; m < psi.size(); ++m) {
    if (psi.undetermined[static_cast<std::size_t>(m)]) continue;
    const double d = std::abs(psi.values[m]) - mean;
    var += d * d;
  }
  return {mean, std::sqrt(var / static_cast<double>(count))};
}

// Normalizes psi to unit mean magnitude and reports the relative spread.
PhaseRecovery normalize(PhaseVector psi) {
  const Spread spread = magnitude_spread(psi);
  if (!(spread.mean > 0.0)) throw Error("trivial solution: recovered phases vanish");
  for (Index m = 0; m < psi.size(); ++m) {
    if (psi.undetermined[static_cast<std::size_t>(m)]) {
      psi.values[m] = 1.0;
    } else {
      psi.values[m] /= spread.mean;
    }
  }
  return PhaseRecovery{std::move(psi), spread.stdev / spread.mean, spread.mean};
}

KernelVector exact_kernel(const CMatrix& matrix) {
  const Index n = matrix.cols();
  Eigen::BDCSVD<CMatrix> svd(matrix, Eigen::ComputeFullV);
  const RVector& computed = svd.singularValues();
  // Rows < cols leaves implicit zero singular values.
  RVector sigma = RVector::Zero(n);
  sigma.head(computed.size()) = computed;

  KernelVector out;
  out.vector = svd.matrixV().col(n - 1);
  out.sigma_min = sigma[n - 1];
  if (n == 1) {
    out.gap = std::numeric_limits<double>::infinity();
  } else if (out.sigma_min > 0.0) {
    out.gap = sigma[n - 2] / out.sigma_min;
  } else {
    out.gap = sigma[n - 2] > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  return out;
}

// Inverse subspace iteration with two vectors on the (slightly shifted)
// normal matrix, with Rayleigh-Ritz rotation after every step. The identity
// shift keeps the factorization definite without moving eigenvectors.
KernelVector iterative_kernel(const CMatrix& matrix) {
  const Index n = matrix.cols();
  const CMatrix gram = matrix.adjoint() * matrix;
  const double scale = gram.trace().real() / static_cast<double>(n);
  if (!(scale > 0.0)) {
    KernelVector zero;
    zero.vector = CVector::Unit(n, 0);
    zero.sigma_min = 0.0;
    zero.gap = 1.0;
    return zero;
  }

  double shift = 1e-12 * scale;
  Eigen::LLT<CMatrix> llt;
  for (int attempt = 0; attempt < 8; ++attempt) {
    llt.compute(gram + shift * CMatrix::Identity(n, n));
    if (llt.info() == Eigen::Success) break;
    shift *= 10.0;
  }
  if (llt.info() != Eigen::Success) throw ConvergenceError("normal matrix factorization failed", scale);

  const Index block = std::min<Index>(2, n);
  Rng rng(kIterativeSeed);
  CMatrix basis = complex_gaussian_matrix(n, block, rng);
  const double norm_gram = gram.norm();

  CVector previous = CVector::Zero(n);
  double residual = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < kIterativeCap; ++iter) {
    CMatrix next = llt.solve(basis);
    Eigen::HouseholderQR<CMatrix> qr(next);
    basis = qr.householderQ() * CMatrix::Identity(n, block);
    if (!basis.allFinite()) {
      // Restart from a fresh random block.
      basis = complex_gaussian_matrix(n, block, rng);
      continue;
    }

    const CMatrix projected = basis.adjoint() * gram * basis;
    Eigen::SelfAdjointEigenSolver<CMatrix> ritz(projected);
    basis = basis * ritz.eigenvectors();

    const CVector v = basis.col(0);
    const double overlap = std::min(1.0, std::abs(previous.dot(v)));
    const double change = std::sqrt(std::max(0.0, 1.0 - overlap * overlap));
    previous = v;

    residual = 0.0;
    for (Index k = 0; k < block; ++k) {
      const CVector col = basis.col(k);
      residual = std::max(residual, (gram * col - ritz.eigenvalues()[k] * col).norm());
    }
    const bool subspace_settled = residual <= 1e-13 * norm_gram;
    if (iter > 0 && (change < 1e-13 || subspace_settled)) {
      KernelVector out;
      out.vector = v;
      out.sigma_min = (matrix * v).norm();
      if (block < 2) {
        out.gap = std::numeric_limits<double>::infinity();
      } else {
        const double second = (matrix * basis.col(1)).norm();
        out.gap = out.sigma_min > 0.0 ? second / out.sigma_min : std::numeric_limits<double>::infinity();
      }
      return out;
    }
  }
  throw ConvergenceError("inverse iteration did not converge", residual);
}

}  // namespace

bool check_oversampling(Index unknowns, Index groups, Index coherent, Index zero_groups) {
  if (coherent < 2) throw InvalidArgument("no coherence information: need C >= 2");
  if (unknowns < 0 || groups < 0 || zero_groups < 0 || zero_groups > groups) {
    throw InvalidArgument("counts must be nonnegative and zero groups at most M");
  }
  const Index rank_b = groups - zero_groups;
  return coherent * groups - rank_b >= unknowns - 1;
}

NullSpaceSystem build_q(const ForwardOperator& op, const PartialObservations& obs) {
  const CoherenceLayout& layout = op.layout();
  if (!(obs.layout() == layout)) throw InvalidArgument("observations and operator layouts differ");
  const Index groups = layout.groups();
  const Index coherent = layout.coherent();
  if (coherent < 2) throw InvalidArgument("no coherence information: need C >= 2");

  const Index zero_groups = obs.zero_groups();
  const Index block_rows = groups * (coherent - 1);
  const CMatrix& a = op.matrix();
  const CMatrix& coeff = obs.coefficients();
  const double zero_row_scale = rms_nonzero_magnitude(obs);

  NullSpaceSystem sys;
  sys.kind = SystemKind::Q;
  sys.zero_group_rows = zero_groups;
  sys.matrix.resize(block_rows + zero_groups, op.unknowns());

  Index extra = block_rows;
  for (Index m = 0; m < groups; ++m) {
    const Index anchor = obs.anchor(m);
    if (anchor < 0) {
      for (Index slot = 0; slot < coherent - 1; ++slot) {
        sys.matrix.row(slot * groups + m) = zero_row_scale * a.row(layout.row(m, slot + 1));
      }
      sys.matrix.row(extra++) = zero_row_scale * a.row(layout.row(m, 0));
      continue;
    }
    Index slot = 0;
    for (Index c = 0; c < coherent; ++c) {
      if (c == anchor) continue;
      sys.matrix.row(slot * groups + m) =
          coeff(m, c) * a.row(layout.row(m, anchor)) - coeff(m, anchor) * a.row(layout.row(m, c));
      ++slot;
    }
  }
  return sys;
}

NullSpaceSystem build_r(const ForwardOperator& op, const PartialObservations& obs) {
  if (!(obs.layout() == op.layout())) throw InvalidArgument("observations and operator layouts differ");
  NullSpaceSystem sys;
  sys.kind = SystemKind::R;
  sys.groups = nonzero_groups(obs);

  const CMatrix full = obs.stacked();
  CMatrix b(full.rows(), static_cast<Index>(sys.groups.size()));
  for (Index j = 0; j < b.cols(); ++j) b.col(j) = full.col(sys.groups[static_cast<std::size_t>(j)]);

  const auto qr = factor(op.matrix());
  sys.rank_warning = qr.rank() < op.unknowns();
  const CMatrix coefficients = qr.solve(b);
  sys.matrix = op.matrix() * coefficients - b;
  return sys;
}

KernelVector smallest_singular_vector(const CMatrix& matrix, KernelMethod method) {
  if (matrix.rows() == 0 || matrix.cols() == 0) throw InvalidArgument("kernel of an empty matrix");
  return method == KernelMethod::ExactSvd ? exact_kernel(matrix) : iterative_kernel(matrix);
}

KernelVector smallest_singular_vector(const NullSpaceSystem& sys, KernelMethod method) {
  return smallest_singular_vector(sys.matrix, method);
}

RVector singular_values(const CMatrix& matrix) {
  Eigen::BDCSVD<CMatrix> svd(matrix);
  return svd.singularValues();
}

PhaseRecovery recover_phases(const ForwardOperator& op, const PartialObservations& obs,
                             const CVector& x) {
  if (x.size() != op.unknowns()) throw DimensionError("recover_phases input", op.unknowns(), x.size());
  if (x.isZero(0.0)) throw Error("trivial solution: x is zero");
  const CoherenceLayout& layout = op.layout();
  const CVector image = op.matrix() * x;

  PhaseVector psi;
  psi.values = CVector::Ones(layout.groups());
  psi.undetermined.assign(static_cast<std::size_t>(layout.groups()), false);
  for (Index m = 0; m < layout.groups(); ++m) {
    if (obs.is_zero_group(m)) {
      psi.undetermined[static_cast<std::size_t>(m)] = true;
      continue;
    }
    // Least-squares combination of the per-block estimates (A_c x)_m / [B_c]_mm.
    Complex num = 0.0;
    double den = 0.0;
    for (Index c = 0; c < layout.coherent(); ++c) {
      const Complex coeff = obs.coefficients()(m, c);
      if (coeff == Complex(0.0)) continue;
      num += std::conj(coeff) * image[layout.row(m, c)];
      den += std::norm(coeff);
    }
    psi.values[m] = num / den;
  }
  return normalize(std::move(psi));
}

CVector reconstruct_plain(const ForwardOperator& op, const PartialObservations& obs,
                          const PhaseVector& psi) {
  if (psi.size() != obs.layout().groups()) {
    throw DimensionError("phase vector", obs.layout().groups(), psi.size());
  }
  const CVector rhs = stacked_times(obs, psi.values);
  return factor(op.matrix()).solve(rhs);
}

CVector reconstruct_unit_constrained(const ForwardOperator& op, const PartialObservations& obs,
                                     const PhaseVector& psi) {
  if (psi.size() != obs.layout().groups()) {
    throw DimensionError("phase vector", obs.layout().groups(), psi.size());
  }
  PhaseVector unit = psi;
  for (Index m = 0; m < unit.size(); ++m) {
    if (obs.is_zero_group(m)) {
      unit.values[m] = 1.0;
      continue;
    }
    const double mag = std::abs(unit.values[m]);
    if (mag <= 1e-14) throw Error("phase undetermined at entry " + std::to_string(m));
    unit.values[m] /= mag;
  }
  return reconstruct_plain(op, obs, unit);
}

PhaseVector solve_pinned(const ForwardOperator& op, const PartialObservations& obs, Index pin_group) {
  const CMatrix pinned = pinned_matrix(op, obs, pin_group);
  Eigen::BDCSVD<CMatrix> svd(pinned, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& sigma = svd.singularValues();
  const double smallest = sigma[sigma.size() - 1];
  if (!(smallest > 0.0) || sigma[0] / smallest > kSingularCondition) {
    throw Error("degenerate pinned system");
  }
  CVector rhs = CVector::Zero(pinned.rows());
  rhs[pinned.rows() - 1] = pinned.row(pinned.rows() - 1).cwiseAbs().maxCoeff();
  const CVector reduced = svd.solve(rhs);

  const std::vector<Index> groups = nonzero_groups(obs);
  PhaseVector psi;
  psi.values = CVector::Ones(obs.layout().groups());
  psi.undetermined.assign(static_cast<std::size_t>(obs.layout().groups()), true);
  for (std::size_t j = 0; j < groups.size(); ++j) {
    psi.values[groups[j]] = reduced[static_cast<Index>(j)];
    psi.undetermined[static_cast<std::size_t>(groups[j])] = false;
  }
  return psi;
}

double stacked_spectral_norm(const PartialObservations& obs) {
  return obs.coefficients().rowwise().norm().maxCoeff();
}

double perturbation_bound(const ForwardOperator& op, const PartialObservations& obs, Index pin_group) {
  const CMatrix pinned = pinned_matrix(op, obs, pin_group);
  const RVector sigma = singular_values(pinned);
  const double smallest = sigma[sigma.size() - 1];
  if (!(smallest > 0.0)) return std::numeric_limits<double>::infinity();
  return stacked_spectral_norm(obs) / smallest;
}

namespace {

// Divides every Q row by the noise scale of its pair, sqrt(|B_a|^2 + |B_c|^2);
// zero-group rows lose their magnitude scale. The kernel is unchanged.
void equilibrate_q(const PartialObservations& obs, NullSpaceSystem& sys) {
  const CoherenceLayout& layout = obs.layout();
  const Index groups = layout.groups();
  const CMatrix& coeff = obs.coefficients();
  const double zero_row_scale = rms_nonzero_magnitude(obs);
  Index extra = groups * (layout.coherent() - 1);
  for (Index m = 0; m < groups; ++m) {
    const Index anchor = obs.anchor(m);
    if (anchor < 0) {
      for (Index slot = 0; slot < layout.coherent() - 1; ++slot) sys.matrix.row(slot * groups + m) /= zero_row_scale;
      sys.matrix.row(extra++) /= zero_row_scale;
      continue;
    }
    Index slot = 0;
    for (Index c = 0; c < layout.coherent(); ++c) {
      if (c == anchor) continue;
      sys.matrix.row(slot * groups + m) /= std::sqrt(std::norm(coeff(m, anchor)) + std::norm(coeff(m, c)));
      ++slot;
    }
  }
}

}  // namespace

SolveReport solve_nullspace_q(const ForwardOperator& op, const PartialObservations& obs,
                              KernelMethod method) {
  NullSpaceSystem sys = build_q(op, obs);
  equilibrate_q(obs, sys);
  const KernelVector kernel = smallest_singular_vector(sys, method);
  PhaseRecovery recovery = recover_phases(op, obs, kernel.vector);

  SolveReport report;
  report.x = kernel.vector / recovery.scale;
  report.psi = std::move(recovery.psi);
  report.sigma_min = kernel.sigma_min;
  report.gap = kernel.gap;
  report.psi_fluctuation = recovery.fluctuation;
  report.reliable = kernel.gap >= kDegenerateGap;
  return report;
}

SolveReport solve_nullspace_r(const ForwardOperator& op, const PartialObservations& obs,
                              Reconstruction reconstruction, KernelMethod method) {
  const NullSpaceSystem sys = build_r(op, obs);
  if (sys.groups.empty()) throw Error("all observations are zero");
  const KernelVector kernel = smallest_singular_vector(sys, method);

  PhaseVector psi;
  psi.values = CVector::Ones(obs.layout().groups());
  psi.undetermined.assign(static_cast<std::size_t>(obs.layout().groups()), true);
  for (std::size_t j = 0; j < sys.groups.size(); ++j) {
    psi.values[sys.groups[j]] = kernel.vector[static_cast<Index>(j)];
    psi.undetermined[static_cast<std::size_t>(sys.groups[j])] = false;
  }
  PhaseRecovery recovery = normalize(std::move(psi));

  SolveReport report;
  report.x = reconstruction == Reconstruction::Plain
                 ? reconstruct_plain(op, obs, recovery.psi)
                 : reconstruct_unit_constrained(op, obs, recovery.psi);
  report.psi = std::move(recovery.psi);
  report.sigma_min = kernel.sigma_min;
  report.gap = kernel.gap;
  report.psi_fluctuation = recovery.fluctuation;
  report.reliable = kernel.gap >= kDegenerateGap && !sys.rank_warning;
  return report;
}

SolveReport solve_complex_least_squares(const ForwardOperator& op, const CVector& b) {
  if (b.size() != op.observations()) throw DimensionError("observation vector", op.observations(), b.size());
  SolveReport report;
  report.x = factor(op.matrix()).solve(b);
  report.psi.values = CVector::Ones(op.layout().groups());
  report.psi.undetermined.assign(static_cast<std::size_t>(op.layout().groups()), false);
  report.psi_fluctuation = 0.0;
  return report;
}

}  // namespace cophase
