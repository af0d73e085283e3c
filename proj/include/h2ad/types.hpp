#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace h2ad {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Error taxonomy. The CLI maps ConfigError to exit code 2 and NumericError to 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid geometry, scene, or experiment settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or empty inputs to an operation.
class InputError : public Error {
 public:
  using Error::Error;
};

// Requested source count incompatible with the observation dimension.
class ModelOrderError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, singular systems, failed convergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Signal subspace has lower numeric rank than the requested source count.
class DegenerateSubspaceError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Fusion could not find enough supported clusters for the requested count.
class InsufficientSupportError : public Error {
 public:
  using Error::Error;
};

}  // namespace h2ad
