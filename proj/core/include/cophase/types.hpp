// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cophase {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand sizes do not agree with the declared problem dimensions.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, Index expected, Index actual)
      : Error(what + ": expected length " + std::to_string(expected) + ", got " +
              std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  Index expected() const noexcept { return expected_; }
  Index actual() const noexcept { return actual_; }

 private:
  Index expected_;
  Index actual_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative method hit its iteration cap; carries the last residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace cophase
