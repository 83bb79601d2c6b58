#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sadyn {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// S x D state matrix, one row per token.
using TokenMatrix = Eigen::MatrixXd;

/// Unit-norm tolerance used when an operator requires states on the sphere.
inline constexpr double kSphereTolerance = 1e-10;

/// Default floor below which a row (or oscillator) norm is considered
/// degenerate. Rows under the floor raise, they are never clamped.
inline constexpr double kDefaultEpsFloor = 1e-12;

enum class ErrorKind {
  NonFiniteLogits,
  ShapeError,
  DegenerateRow,
  NotOnSphere,
  NonFiniteMap,
  NoConvergence,
  EigFailure,
  EnergyOverflow,
  DivisibilityError,
  DivergedAt,
  TangentCollapse,
  HeadCountError,
  InvalidArgument,
  ConfigError,
  IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<Index> index = std::nullopt,
        std::optional<long> step = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  /// Row / oscillator / exponent index the error refers to, if any.
  std::optional<Index> index() const noexcept { return index_; }
  /// Iteration or integration step the error refers to, if any.
  std::optional<long> step() const noexcept { return step_; }

 private:
  ErrorKind kind_;
  std::optional<Index> index_;
  std::optional<long> step_;
};

/// Power iteration ran out of iterations. Carries the last estimate.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(double last_estimate, int iterations,
                     double last_residual);
  double last_estimate() const noexcept { return last_estimate_; }
  int iterations() const noexcept { return iterations_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_estimate_;
  int iterations_;
  double last_residual_;
};

/// An exponent in an energy sum exceeded the overflow threshold. Carries
/// log(sum exp(.)) so callers can still report the magnitude.
class EnergyOverflowError : public Error {
 public:
  explicit EnergyOverflowError(double log_magnitude);
  double log_magnitude() const noexcept { return log_magnitude_; }

 private:
  double log_magnitude_;
};

[[noreturn]] void throw_shape(const std::string& what);
void require_shape(bool ok, const std::string& what);

/// Token-major vectorization: vec(X)[i*D + k] = X(i, k).
Vector vec(const Matrix& x);
Matrix unvec(const Vector& v, Index rows, Index cols);

bool all_finite(const Matrix& m);

}  // namespace sadyn
