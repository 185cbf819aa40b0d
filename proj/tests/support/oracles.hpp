// SPDX-License-Identifier: Apache-2.0
//
// Reference implementations used only by the tests. They are deliberately
// naive and share no code with the library beyond the basic typedefs.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "cophase/types.hpp"

namespace oracle {

using cophase::CMatrix;
using cophase::Complex;
using cophase::CVector;
using cophase::Index;
using cophase::RMatrix;
using cophase::RVector;

inline CVector matvec(const CMatrix& a, const CVector& x) {
  CVector y(a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    Complex acc(0.0, 0.0);
    for (Index k = 0; k < a.cols(); ++k) acc += a(i, k) * x[k];
    y[i] = acc;
  }
  return y;
}

/// Own generator so the tests never depend on the library's streams.
inline CMatrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937 gen(static_cast<std::uint32_t>(seed * 2654435761u + 17u));
  std::normal_distribution<double> normal;
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(normal(gen), normal(gen));
  }
  return m;
}

inline CVector gaussian_vector(Index n, std::uint64_t seed) { return gaussian(n, 1, seed).col(0); }

/// Singular values via one-sided Jacobi (descending), padded with zeros to
/// the column count.
inline RVector singular_values(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  RVector s = RVector::Zero(m.cols());
  s.head(svd.singularValues().size()) = svd.singularValues();
  return s;
}

/// Right singular vector of the smallest singular value (Jacobi, full V).
inline CVector kernel_vector(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  return svd.matrixV().col(m.cols() - 1);
}

/// Number of singular values at or below tol * largest.
inline Index nullity(const CMatrix& m, double tol) {
  const RVector s = singular_values(m);
  Index count = 0;
  for (Index i = 0; i < s.size(); ++i) count += s[i] <= tol * s[0] ? 1 : 0;
  return count;
}

/// |<u, v>| / (||u|| ||v||).
inline double collinearity(const CVector& u, const CVector& v) {
  return std::abs(u.dot(v)) / (u.norm() * v.norm());
}

/// Phase-difference B coefficients straight from the definition, with block 0
/// as reference (no zero handling). Column c is the diagonal of B_c.
inline CMatrix coefficients(const CVector& b, Index groups, Index coherent) {
  CMatrix coeff(groups, coherent);
  for (Index m = 0; m < groups; ++m) {
    const double ref = std::arg(b[m]);
    for (Index c = 0; c < coherent; ++c) {
      const Complex v = b[c * groups + m];
      coeff(m, c) = std::polar(std::abs(v), std::arg(v) - ref);
    }
  }
  return coeff;
}

/// Q rows B_c A_0 - B_0 A_c, block c-1 for c = 1..C-1, by explicit loops.
inline CMatrix q_matrix(const CMatrix& a, const CVector& b, Index groups, Index coherent) {
  const CMatrix coeff = coefficients(b, groups, coherent);
  CMatrix q(groups * (coherent - 1), a.cols());
  for (Index c = 1; c < coherent; ++c) {
    for (Index m = 0; m < groups; ++m) {
      for (Index k = 0; k < a.cols(); ++k) {
        q((c - 1) * groups + m, k) = coeff(m, c) * a(m, k) - coeff(m, 0) * a(c * groups + m, k);
      }
    }
  }
  return q;
}

/// (A (A^H A)^{-1} A^H - I) B via the normal equations.
inline CMatrix r_matrix(const CMatrix& a, const CVector& b, Index groups, Index coherent) {
  const CMatrix coeff = coefficients(b, groups, coherent);
  CMatrix bs = CMatrix::Zero(groups * coherent, groups);
  for (Index c = 0; c < coherent; ++c) {
    for (Index m = 0; m < groups; ++m) bs(c * groups + m, m) = coeff(m, c);
  }
  const CMatrix gram = a.adjoint() * a;
  const CMatrix projector = a * gram.inverse() * a.adjoint();
  return projector * bs - bs;
}

/// True reduced phases: the unit phase of each block-0 entry.
inline CVector true_psi(const CVector& b, Index groups) {
  CVector psi(groups);
  for (Index m = 0; m < groups; ++m) psi[m] = b[m] / std::abs(b[m]);
  return psi;
}

/// Central differences with step h.
inline RVector finite_gradient(const std::function<double(const RVector&)>& f, const RVector& p, double h = 1e-7) {
  RVector g(p.size());
  RVector q = p;
  for (Index i = 0; i < p.size(); ++i) {
    q[i] = p[i] + h;
    const double up = f(q);
    q[i] = p[i] - h;
    const double down = f(q);
    q[i] = p[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Largest eigenvalue of a Hermitian matrix by dense decomposition.
inline double largest_eigenvalue(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  return es.eigenvalues().maxCoeff();
}

/// Field of a z-directed unit Hertzian dipole at the origin in spherical
/// components (E_r, E_theta), k = 2 pi, scaling 1/(4 pi).
struct SphericalField {
  Complex radial;
  Complex polar;
};

inline SphericalField z_dipole(double r, double theta) {
  const double k = 2.0 * std::numbers::pi;
  const Complex j(0.0, 1.0);
  const Complex g = std::exp(-j * k * r) / (4.0 * std::numbers::pi);
  const Complex near = 1.0 / (r * r * r) + j * k / (r * r);
  return {g * 2.0 * std::cos(theta) * near, g * std::sin(theta) * (near - k * k / r)};
}

}  // namespace oracle
