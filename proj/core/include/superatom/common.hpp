#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace superatom {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Frequencies are stored as angular frequencies in rad/us. Files and the CLI
// use ordinary frequencies nu = Omega / 2pi in MHz.
constexpr double angular_from_mhz(double nu_mhz) { return kTwoPi * nu_mhz; }
constexpr double mhz_from_angular(double omega) { return omega / kTwoPi; }

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the admissible domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Requested object is too large for the dense representation.
class CapacityError : public Error {
public:
  using Error::Error;
};

/// Closed-form result requested outside the regime where it holds.
class UnsupportedRegimeError : public DomainError {
public:
  using DomainError::DomainError;
};

/// Integrator or invariant failure during a numerical run.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace superatom
