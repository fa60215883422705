#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace embstab {

using Scalar = double;
using Index = Eigen::Index;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using MatrixRef = Eigen::Ref<const Matrix>;
using VectorRef = Eigen::Ref<const Vector>;

/// Malformed or inconsistent input data (bad files, shape mismatches,
/// violated preconditions on user-supplied values).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numeric failure: degenerate normalization, non-finite values, failed
/// decompositions. Distinct from DataError so callers can map exit codes.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace embstab
