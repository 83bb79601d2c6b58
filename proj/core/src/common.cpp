#include "sadyn/common.hpp"

#include <sstream>

namespace sadyn {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFiniteLogits: return "NonFiniteLogits";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::DegenerateRow: return "DegenerateRow";
    case ErrorKind::NotOnSphere: return "NotOnSphere";
    case ErrorKind::NonFiniteMap: return "NonFiniteMap";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::EigFailure: return "EigFailure";
    case ErrorKind::EnergyOverflow: return "EnergyOverflow";
    case ErrorKind::DivisibilityError: return "DivisibilityError";
    case ErrorKind::DivergedAt: return "DivergedAt";
    case ErrorKind::TangentCollapse: return "TangentCollapse";
    case ErrorKind::HeadCountError: return "HeadCountError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string format_error(ErrorKind kind, const std::string& what,
                         std::optional<Index> index, std::optional<long> step) {
  std::ostringstream os;
  os << to_string(kind);
  if (index || step) {
    os << '(';
    if (index) os << *index;
    if (index && step) os << ',';
    if (step) os << *step;
    os << ')';
  }
  if (!what.empty()) os << ": " << what;
  return os.str();
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& what, std::optional<Index> index,
             std::optional<long> step)
    : std::runtime_error(format_error(kind, what, index, step)),
      kind_(kind),
      index_(index),
      step_(step) {}

NoConvergenceError::NoConvergenceError(double last_estimate, int iterations,
                                       double last_residual)
    : Error(ErrorKind::NoConvergence,
            "power iteration stopped at estimate " +
                std::to_string(last_estimate) + " (residual " +
                std::to_string(last_residual) + ")",
            std::nullopt, iterations),
      last_estimate_(last_estimate),
      iterations_(iterations),
      last_residual_(last_residual) {}

EnergyOverflowError::EnergyOverflowError(double log_magnitude)
    : Error(ErrorKind::EnergyOverflow,
            "exponent overflow; log-sum-exp = " + std::to_string(log_magnitude)),
      log_magnitude_(log_magnitude) {}

void throw_shape(const std::string& what) {
  throw Error(ErrorKind::ShapeError, what);
}

void require_shape(bool ok, const std::string& what) {
  if (!ok) throw_shape(what);
}

Vector vec(const Matrix& x) {
  Vector v(x.size());
  const Index cols = x.cols();
  for (Index i = 0; i < x.rows(); ++i)
    for (Index k = 0; k < cols; ++k) v(i * cols + k) = x(i, k);
  return v;
}

Matrix unvec(const Vector& v, Index rows, Index cols) {
  require_shape(v.size() == rows * cols, "unvec: length does not match shape");
  Matrix x(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) x(i, k) = v(i * cols + k);
  return x;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace sadyn
