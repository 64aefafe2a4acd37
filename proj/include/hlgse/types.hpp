#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hlgse {

using Real = double;
using Complex = std::complex<double>;
using Index = Eigen::Index;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

inline constexpr Real kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// Raised when an input violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an internal consistency guard trips (a bug, not a user error).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised by the heuristic crossing search when no crossing exists.
class NoCrossing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hlgse
