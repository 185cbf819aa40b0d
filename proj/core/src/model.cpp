// SPDX-License-Identifier: Apache-2.0
#include "cophase/model.hpp"

#include <cmath>
#include <numbers>

#include "cophase/random.hpp"

namespace cophase {

namespace {

// Wraps an angle from [-pi, pi] onto (-pi, pi].
double wrap_half_open(double angle) {
  return angle <= -std::numbers::pi ? angle + 2.0 * std::numbers::pi : angle;
}

}  // namespace

CoherenceLayout::CoherenceLayout(Index groups, Index coherent) : groups_(groups), coherent_(coherent) {
  if (groups < 1) throw InvalidArgument("coherence layout needs at least one group");
  if (coherent < 1) throw InvalidArgument("coherence layout needs at least one observation per group");
}

std::vector<Index> CoherenceLayout::members(Index group) const {
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(coherent_));
  for (Index c = 0; c < coherent_; ++c) rows.push_back(row(group, c));
  return rows;
}

ForwardOperator::ForwardOperator(CMatrix matrix, CoherenceLayout layout)
    : matrix_(std::move(matrix)), layout_(layout) {
  if (matrix_.rows() != layout_.observations()) {
    throw DimensionError("forward operator rows", layout_.observations(), matrix_.rows());
  }
  if (matrix_.cols() < 1) throw InvalidArgument("forward operator needs at least one column");
}

TrueSolution TrueSolution::from(const ForwardOperator& op, CVector xi) {
  CVector b = forward_apply(op, xi);
  return TrueSolution{std::move(xi), std::move(b)};
}

CMatrix PartialObservations::stacked() const {
  const Index groups = layout_.groups();
  CMatrix stack = CMatrix::Zero(layout_.observations(), groups);
  for (Index c = 0; c < layout_.coherent(); ++c) {
    for (Index m = 0; m < groups; ++m) stack(layout_.row(m, c), m) = coefficients_(m, c);
  }
  return stack;
}

Index PartialObservations::zero_groups() const noexcept {
  Index count = 0;
  for (Index a : anchors_) count += a < 0 ? 1 : 0;
  return count;
}

bool PhaseVector::is_unit(double tol) const {
  for (Index m = 0; m < values.size(); ++m) {
    const bool skip = !undetermined.empty() && undetermined[static_cast<std::size_t>(m)];
    if (!skip && std::abs(std::abs(values[m]) - 1.0) > tol) return false;
  }
  return true;
}

CVector forward_apply(const ForwardOperator& op, const CVector& x) {
  if (x.size() != op.unknowns()) throw DimensionError("forward_apply input", op.unknowns(), x.size());
  return op.matrix() * x;
}

PartialObservations observe_partial(const CoherenceLayout& layout, const CVector& b) {
  if (b.size() != layout.observations()) {
    throw DimensionError("observation vector", layout.observations(), b.size());
  }
  const Index groups = layout.groups();
  const Index coherent = layout.coherent();

  PartialObservations obs(layout);
  obs.magnitudes_ = b.cwiseAbs();
  obs.zero_threshold_ = kZeroMagnitudeRelTol * (b.size() > 0 ? obs.magnitudes_.maxCoeff() : 0.0);
  obs.zero_.resize(static_cast<std::size_t>(b.size()));
  for (Index i = 0; i < b.size(); ++i) {
    obs.zero_[static_cast<std::size_t>(i)] = obs.magnitudes_[i] <= obs.zero_threshold_;
  }

  obs.phase_diffs_ = RMatrix::Zero(groups, coherent - 1);
  obs.coefficients_ = CMatrix::Zero(groups, coherent);
  obs.anchors_.assign(static_cast<std::size_t>(groups), -1);

  for (Index m = 0; m < groups; ++m) {
    const Index first = layout.row(m, 0);
    for (Index c = 1; c < coherent; ++c) {
      const Index row = layout.row(m, c);
      if (obs.is_zero(first) || obs.is_zero(row)) continue;
      obs.phase_diffs_(m, c - 1) = wrap_half_open(std::arg(b[row] * std::conj(b[first])));
    }

    Index anchor = -1;
    for (Index c = 0; c < coherent && anchor < 0; ++c) {
      if (!obs.is_zero(layout.row(m, c))) anchor = c;
    }
    obs.anchors_[static_cast<std::size_t>(m)] = anchor;
    if (anchor < 0) continue;

    const Complex reference = b[layout.row(m, anchor)];
    for (Index c = 0; c < coherent; ++c) {
      const Index row = layout.row(m, c);
      if (obs.is_zero(row)) continue;
      // For anchor 0 this is exactly dphi_{m+cM,m} from phase_differences().
      const double dphi = c == anchor ? 0.0 : wrap_half_open(std::arg(b[row] * std::conj(reference)));
      obs.coefficients_(m, c) = std::polar(obs.magnitudes_[row], dphi);
    }
  }
  return obs;
}

PartialObservations observe_partial(const ForwardOperator& op, const CVector& b) {
  return observe_partial(op.layout(), b);
}

double phase_diff_from_magnitudes(double mag_k, double mag_m, double mag_sum, double mag_quad) {
  if (mag_k < 0 || mag_m < 0 || mag_sum < 0 || mag_quad < 0) {
    throw InvalidArgument("magnitudes must be nonnegative");
  }
  if (mag_k == 0.0 && mag_m == 0.0) throw InvalidArgument("phase difference undefined");
  const double base = mag_k * mag_k + mag_m * mag_m;
  const double re = mag_sum * mag_sum - base;    // 2 Re(b_k conj b_m)
  const double im = mag_quad * mag_quad - base;  // 2 Im(b_k conj b_m)
  return wrap_half_open(std::atan2(im, re));
}

CVector add_noise(const CVector& b, const NoiseSpec& spec) {
  if (!(spec.ratio >= 0.0)) throw InvalidArgument("noise ratio must be nonnegative");
  if (spec.ratio == 0.0) return b;
  Rng rng(spec.seed);
  CVector delta = complex_gaussian_vector(b.size(), rng);
  const double target = spec.ratio * b.norm();
  const double drawn = delta.norm();
  if (drawn == 0.0) return b;
  delta *= target / drawn;
  return b + delta;
}

double noise_to_signal(const CVector& b_prime, const CVector& b) {
  if (b_prime.size() != b.size()) throw DimensionError("noise_to_signal", b.size(), b_prime.size());
  const double reference = b.norm();
  if (reference == 0.0) throw InvalidArgument("noise_to_signal: reference vector is zero");
  return (b_prime - b).norm() / reference;
}

double relative_deviation(const ForwardOperator& op, const CVector& x, const CVector& xi) {
  const CVector truth = forward_apply(op, xi);
  const double reference = truth.norm();
  if (reference == 0.0) throw InvalidArgument("relative_deviation: A*xi is zero");
  const CVector image = forward_apply(op, x);
  const double energy = image.squaredNorm();
  if (energy == 0.0) return 1.0;
  // Least-squares gauge: alpha = <Ax, A xi> / ||Ax||^2.
  const Complex alpha = image.dot(truth) / energy;
  return (alpha * image - truth).norm() / reference;
}

bool success(double rd, double noise_ratio) {
  if (!(noise_ratio > 0.0)) throw InvalidArgument("success threshold needs a positive noise ratio");
  return rd < 3.0 * noise_ratio;
}

}  // namespace cophase
