#pragma once

// Isolated linear oscillators x' = Omega x and their two discretizations,
// with and without spherical normalization.

#include <optional>
#include <vector>

#include "sadyn/jacobian.hpp"

namespace sadyn {

enum class OscVariant { Continuous, DiscretePlain, DiscreteNormalized };

const char* to_string(OscVariant v);
OscVariant parse_osc_variant(const std::string& s);

struct OscSystem {
  Matrix omega;  // antisymmetric D x D
  double eta = 1.0;
  OscVariant variant = OscVariant::DiscreteNormalized;

  Index dim() const { return omega.rows(); }
  void validate() const;
};

/// Block-diagonal generator with 2 x 2 blocks [[0, w], [-w, 0]].
Matrix rotation_generator(const std::vector<double>& omegas);

/// True when all singular values of omega (the |omega_j|) agree within
/// rel_tol of the largest.
bool is_degenerate(const Matrix& omega, double rel_tol = 1e-9);

/// One update without the unit-norm precondition:
///   Continuous          Omega x (the right-hand side)
///   DiscretePlain       (I + eta Omega) x
///   DiscreteNormalized  Pi((I + eta Omega) x)
Vector osc_apply(const OscSystem& sys, const Vector& x);
/// osc_apply after checking ||x|| = 1 for the normalized variant.
Vector osc_step(const OscSystem& sys, const Vector& x);

JacobianMatrix osc_jacobian(const OscSystem& sys, const Vector& x);

struct OscEigenCheck {
  SpectralSummary spectrum;
  double min_abs_eig = 0.0;
  double max_abs_real = 0.0;
  bool degenerate = false;
  /// Continuous: max |Re| <= 1e-10. Plain: min |lambda| >= 1 - 1e-10.
  /// Normalized: ||J|| <= 1 + 1e-10, only asserted for a degenerate
  /// spectrum and left empty otherwise.
  std::optional<bool> verdict;
};

OscEigenCheck osc_eigen_check(const OscSystem& sys, const Vector& x);

struct PhaseCell {
  double eta = 0.0;
  double omega = 0.0;
  double max_abs_eig = 0.0;
  double spectral_norm = 0.0;
  bool degenerate = false;
};

/// For every (eta, omega) the D-dimensional system with all |omega_j| =
/// omega, evaluated at x = (1, ..., 1)/sqrt(D). Rows are eta-major.
std::vector<PhaseCell> phase_scan(const std::vector<double>& eta_grid,
                                  const std::vector<double>& omega_grid,
                                  OscVariant variant, Index dim = 2);

}  // namespace sadyn
