#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace dmr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Relative threshold for declaring a triangular factor rank deficient:
// |R_ii| < kRankTol * max_j |R_jj|.
inline constexpr double kRankTol = 1e-10;

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input/validation problems (bad schema, unknown level, too few rows).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class UnknownLevelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TooFewRowsError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidConstraintError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Numerical problems discovered while fitting.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class RankDeficientError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ZeroVarianceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ZeroRssError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Constraint rows fed to the path recursion were linearly dependent.  Valid
// elementary constraint orderings never produce this, so seeing it means a
// bug upstream rather than bad user input.
class DegenerateConstraintsError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace dmr
