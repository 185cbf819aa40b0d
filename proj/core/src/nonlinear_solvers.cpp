// SPDX-License-Identifier: Apache-2.0
#include "cophase/nonlinear_solvers.hpp"

#include <cmath>
#include <limits>

#include <ceres/ceres.h>

#include "cophase/linear_solvers.hpp"
#include "cophase/random.hpp"

namespace cophase {

struct CostFunctional::Data {
  CostKind kind = CostKind::MagnitudeOnly;
  CoherenceLayout layout{1, 1};
  Index unknowns = 0;
  Index angles = 0;
  double eps = 0.0;
  double b_norm = 0.0;
  Index dropped = 0;

  // Magnitude block: s(mag_op x) - mag_target.
  CMatrix mag_op;
  RVector mag_target;

  // Linear block: lin_op x - phase_term(theta).
  CMatrix lin_op;
  // Per-row phase term: amplitude * exp(j (theta_group + offset)).
  RVector term_amplitude;
  RVector term_offset;
  std::vector<Index> term_group;
};

namespace {

using Data = CostFunctional::Data;

// Accumulates 1/2 ||s(op x) - target||^2 and its gradient into g (complex,
// G = 2 df/d conj(x), so grad Re x = Re G and grad Im x = Im G).
double magnitude_block(const CMatrix& op, const RVector& target, double eps, const CVector& x,
                       CVector* g) {
  if (op.rows() == 0) return 0.0;
  const CVector u = op * x;
  CVector w(u.size());
  double f = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    const double s = std::sqrt(std::norm(u[i]) + eps * eps);
    const double r = s - target[i];
    f += 0.5 * r * r;
    w[i] = s > 0.0 ? u[i] * (r / s) : Complex(0.0);
  }
  if (g) *g += op.adjoint() * w;
  return f;
}

double evaluate(const Data& d, const double* params, double* gradient) {
  const Index n = d.unknowns;
  const Eigen::Map<const RVector> p(params, 2 * n + d.angles);
  CVector x(n);
  for (Index k = 0; k < n; ++k) x[k] = Complex(p[k], p[n + k]);

  CVector g = CVector::Zero(n);
  CVector* gp = gradient ? &g : nullptr;
  double f = magnitude_block(d.mag_op, d.mag_target, d.eps, x, gp);

  RVector angle_grad = RVector::Zero(d.angles);
  if (d.lin_op.rows() > 0) {
    CVector r = d.lin_op * x;
    if (d.angles > 0) {
      for (Index i = 0; i < r.size(); ++i) {
        const Index m = d.term_group[static_cast<std::size_t>(i)];
        const Complex term = std::polar(d.term_amplitude[i], p[2 * n + m] + d.term_offset[i]);
        r[i] -= term;
        // d r_i / d theta_m = -j term
        if (gradient) angle_grad[m] += std::real(std::conj(r[i]) * Complex(0.0, -1.0) * term);
      }
    }
    f += 0.5 * r.squaredNorm();
    if (gradient) g += d.lin_op.adjoint() * r;
  }

  if (gradient) {
    for (Index k = 0; k < n; ++k) {
      gradient[k] = g[k].real();
      gradient[n + k] = g[k].imag();
    }
    for (Index m = 0; m < d.angles; ++m) gradient[2 * n + m] = angle_grad[m];
  }
  return f;
}

class CeresObjective final : public ceres::FirstOrderFunction {
 public:
  explicit CeresObjective(const CostFunctional& functional) : functional_(functional) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    *cost = functional_.objective(parameters, gradient);
    return std::isfinite(*cost);
  }

  int NumParameters() const override { return static_cast<int>(functional_.parameter_count()); }

 private:
  const CostFunctional& functional_;
};

class StopOnCost final : public ceres::IterationCallback {
 public:
  explicit StopOnCost(double threshold) : half_square_(0.5 * threshold * threshold) {}

  ceres::CallbackReturnType operator()(const ceres::IterationSummary& summary) override {
    return summary.cost <= half_square_ ? ceres::SOLVER_TERMINATE_SUCCESSFULLY : ceres::SOLVER_CONTINUE;
  }

 private:
  double half_square_;
};

}  // namespace

std::string_view to_string(CostKind kind) {
  switch (kind) {
    case CostKind::MagnitudeOnly: return "magnitude_only";
    case CostKind::FullPhaseConstrained: return "full_phase_constrained";
    case CostKind::ReducedPhase: return "reduced_phase";
    case CostKind::EliminatedPhase: return "eliminated_phase";
    case CostKind::PaulusComparison: return "paulus_comparison";
  }
  return "unknown";
}

CostFunctional CostFunctional::make(CostKind kind, const ForwardOperator& op, const PartialObservations& obs) {
  const CoherenceLayout& layout = op.layout();
  if (!(obs.layout() == layout)) throw InvalidArgument("observations and operator layouts differ");
  const Index groups = layout.groups();
  const Index coherent = layout.coherent();
  const CMatrix& a = op.matrix();

  auto d = std::make_shared<Data>();
  d->kind = kind;
  d->layout = layout;
  d->unknowns = op.unknowns();
  d->b_norm = obs.magnitudes().norm();
  d->eps = 1e-12 * (obs.magnitudes().size() > 0 ? obs.magnitudes().maxCoeff() : 0.0);

  switch (kind) {
    case CostKind::MagnitudeOnly:
      d->mag_op = a;
      d->mag_target = obs.magnitudes();
      break;

    case CostKind::ReducedPhase:
    case CostKind::FullPhaseConstrained: {
      d->angles = groups;
      d->lin_op = a;
      d->term_amplitude.resize(layout.observations());
      d->term_offset.resize(layout.observations());
      d->term_group.resize(static_cast<std::size_t>(layout.observations()));
      for (Index c = 0; c < coherent; ++c) {
        for (Index m = 0; m < groups; ++m) {
          const Index row = layout.row(m, c);
          d->term_group[static_cast<std::size_t>(row)] = m;
          if (kind == CostKind::ReducedPhase) {
            // [B_c]_mm exp(j theta_m)
            const Complex coeff = obs.coefficients()(m, c);
            d->term_amplitude[row] = std::abs(coeff);
            d->term_offset[row] = std::abs(coeff) > 0.0 ? std::arg(coeff) : 0.0;
          } else {
            // |b_row| exp(j phi_row) with phi_{m+cM} = theta_m + dphi_{m+cM,m}
            d->term_amplitude[row] = obs.is_zero(row) ? 0.0 : obs.magnitudes()[row];
            d->term_offset[row] = c == 0 ? 0.0 : obs.phase_differences()(m, c - 1);
          }
        }
      }
      break;
    }

    case CostKind::EliminatedPhase: {
      if (coherent < 2) throw InvalidArgument("eliminated-phase functional needs C >= 2");
      d->mag_op = op.block(0);
      d->mag_target = obs.magnitudes().head(groups);
      std::vector<Index> kept;
      for (Index m = 0; m < groups; ++m) {
        if (!obs.is_zero(layout.row(m, 0))) kept.push_back(m);
      }
      const Index rows_per_block = static_cast<Index>(kept.size());
      d->dropped = (groups - rows_per_block) * (coherent - 1);
      d->lin_op.resize(rows_per_block * (coherent - 1), op.unknowns());
      for (Index c = 1; c < coherent; ++c) {
        for (Index k = 0; k < rows_per_block; ++k) {
          const Index m = kept[static_cast<std::size_t>(k)];
          const Complex ratio = obs.coefficients()(m, c) / obs.coefficients()(m, 0);
          d->lin_op.row((c - 1) * rows_per_block + k) =
              a.row(layout.row(m, c)) - ratio * a.row(layout.row(m, 0));
        }
      }
      break;
    }

    case CostKind::PaulusComparison: {
      if (coherent != 2) throw InvalidArgument("comparison method implemented for C=2 only");
      const Complex j(0.0, 1.0);
      d->mag_op.resize(4 * groups, op.unknowns());
      d->mag_op.middleRows(0, groups) = op.block(0);
      d->mag_op.middleRows(groups, groups) = op.block(1);
      d->mag_op.middleRows(2 * groups, groups) = op.block(0) + op.block(1);
      d->mag_op.middleRows(3 * groups, groups) = op.block(0) + j * op.block(1);
      const CVector b1 = obs.block_diagonal(0);
      const CVector b2 = obs.block_diagonal(1);
      d->mag_target.resize(4 * groups);
      d->mag_target << b1.cwiseAbs(), b2.cwiseAbs(), (b1 + b2).cwiseAbs(), (b1 + j * b2).cwiseAbs();
      break;
    }
  }
  return CostFunctional(std::move(d));
}

CostKind CostFunctional::kind() const noexcept { return data_->kind; }
Index CostFunctional::unknowns() const noexcept { return data_->unknowns; }
Index CostFunctional::angle_count() const noexcept { return data_->angles; }
double CostFunctional::smoothing() const noexcept { return data_->eps; }
Index CostFunctional::dropped_rows() const noexcept { return data_->dropped; }
double CostFunctional::observation_norm() const noexcept { return data_->b_norm; }

double CostFunctional::objective(const double* params, double* gradient) const {
  return evaluate(*data_, params, gradient);
}

double CostFunctional::value(const RVector& params) const {
  if (params.size() != parameter_count()) throw DimensionError("parameters", parameter_count(), params.size());
  return std::sqrt(2.0 * evaluate(*data_, params.data(), nullptr));
}

double CostFunctional::value(const RVector& params, RVector& gradient) const {
  if (params.size() != parameter_count()) throw DimensionError("parameters", parameter_count(), params.size());
  gradient.resize(parameter_count());
  const double norm = std::sqrt(2.0 * evaluate(*data_, params.data(), gradient.data()));
  // grad ||r|| = grad (||r||^2 / 2) / ||r||
  if (norm > 0.0) {
    gradient /= norm;
  } else {
    gradient.setZero();
  }
  return norm;
}

RVector CostFunctional::pack(const CVector& x, const RVector& angles) const {
  if (x.size() != unknowns()) throw DimensionError("x", unknowns(), x.size());
  RVector params(parameter_count());
  params.head(unknowns()) = x.real();
  params.segment(unknowns(), unknowns()) = x.imag();
  if (angle_count() > 0) {
    const RVector theta = angles.size() == 0 ? initial_angles(x) : angles;
    if (theta.size() != angle_count()) throw DimensionError("angles", angle_count(), theta.size());
    params.tail(angle_count()) = theta;
  }
  return params;
}

CVector CostFunctional::unpack_x(const RVector& params) const {
  const Index n = unknowns();
  CVector x(n);
  for (Index k = 0; k < n; ++k) x[k] = Complex(params[k], params[n + k]);
  return x;
}

RVector CostFunctional::unpack_angles(const RVector& params) const { return params.tail(angle_count()); }

RVector CostFunctional::initial_angles(const CVector& x) const {
  const Data& d = *data_;
  if (d.angles == 0) return RVector();
  const CVector image = d.lin_op * x;
  CVector estimate = CVector::Zero(d.angles);
  for (Index i = 0; i < image.size(); ++i) {
    const Index m = d.term_group[static_cast<std::size_t>(i)];
    const Complex coeff = std::polar(d.term_amplitude[i], d.term_offset[i]);
    estimate[m] += std::conj(coeff) * image[i];
  }
  RVector theta(d.angles);
  for (Index m = 0; m < d.angles; ++m) theta[m] = std::abs(estimate[m]) > 0.0 ? std::arg(estimate[m]) : 0.0;
  return theta;
}

SolveReport minimize(const CostFunctional& functional, const RVector& start, const MinimizerConfig& config) {
  if (start.size() != functional.parameter_count()) {
    throw DimensionError("start point", functional.parameter_count(), start.size());
  }
  if (config.max_iterations <= 0 || config.history_size <= 0 || !(config.gradient_tolerance > 0.0)) {
    throw InvalidArgument("minimizer configuration must be positive");
  }

  RVector params = start;
  ceres::GradientProblem problem(new CeresObjective(functional));
  ceres::GradientProblemSolver::Options options;
  options.line_search_direction_type = ceres::LBFGS;
  options.max_lbfgs_rank = config.history_size;
  options.max_num_iterations = config.max_iterations;
  options.gradient_tolerance = config.gradient_tolerance * std::max(functional.observation_norm(), 1e-300);
  options.function_tolerance = config.function_tolerance;
  options.parameter_tolerance = config.parameter_tolerance;
  options.logging_type = ceres::SILENT;
  options.minimizer_progress_to_stdout = false;
  StopOnCost stop(config.stop_on_cost);
  if (config.stop_on_cost > 0.0) options.callbacks.push_back(&stop);

  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(options, problem, params.data(), &summary);

  SolveReport report;
  report.x = functional.unpack_x(params);
  report.final_cost = functional.value(params);
  report.iterations = std::max(0, static_cast<int>(summary.iterations.size()) - 1);
  report.converged = summary.termination_type == ceres::CONVERGENCE ||
                     summary.termination_type == ceres::USER_SUCCESS;
  if (functional.angle_count() > 0) {
    const RVector theta = functional.unpack_angles(params);
    report.psi.values.resize(theta.size());
    for (Index m = 0; m < theta.size(); ++m) report.psi.values[m] = std::polar(1.0, theta[m]);
    report.psi.undetermined.assign(static_cast<std::size_t>(theta.size()), false);
    report.psi_fluctuation = 0.0;
  }
  return report;
}

SolveReport minimize(const CostFunctional& functional, const CVector& x0, const MinimizerConfig& config) {
  return minimize(functional, functional.pack(x0), config);
}

SpectralInit spectral_initialization(const ForwardOperator& op, const PartialObservations& obs) {
  if (!(obs.layout() == op.layout())) throw InvalidArgument("observations and operator layouts differ");
  const CMatrix& a = op.matrix();
  const RVector weights = obs.magnitudes().array().square();
  const Index n = op.unknowns();
  const int cap = static_cast<int>(10 * n);

  Rng rng(derive_seed(0x737065637472616cULL, static_cast<std::uint64_t>(n)));
  CVector v = complex_gaussian_vector(n, rng).normalized();

  SpectralInit out;
  double lambda = 0.0;
  for (int iter = 1; iter <= std::max(cap, 2); ++iter) {
    const CVector image = a * v;
    const CVector w = a.adjoint() * (weights.cast<Complex>().cwiseProduct(image));
    const double next = v.dot(w).real();
    const double norm = w.norm();
    out.iterations = iter;
    if (!(norm > 0.0)) break;
    v = w / norm;
    const bool settled = iter > 1 && std::abs(next - lambda) <= 1e-10 * std::abs(next);
    lambda = next;
    if (settled) {
      out.converged = true;
      break;
    }
  }
  out.eigenvalue = lambda;

  const CVector image = a * v;
  const double energy = image.squaredNorm();
  const double fit = obs.magnitudes().dot(image.cwiseAbs());
  out.x0 = energy > 0.0 ? CVector(v * (fit / energy)) : CVector(v);
  return out;
}

SolveReport solve_nonlinear(CostKind kind, const ForwardOperator& op, const PartialObservations& obs,
                            const MinimizerConfig& config) {
  const CostFunctional functional = CostFunctional::make(kind, op, obs);
  const SpectralInit init = spectral_initialization(op, obs);
  SolveReport report = minimize(functional, init.x0, config);
  if (functional.angle_count() == 0 && !report.x.isZero(0.0)) {
    try {
      PhaseRecovery recovery = recover_phases(op, obs, report.x);
      report.psi = std::move(recovery.psi);
      report.psi_fluctuation = recovery.fluctuation;
    } catch (const Error&) {
      report.reliable = false;
    }
  }
  return report;
}

}  // namespace cophase
