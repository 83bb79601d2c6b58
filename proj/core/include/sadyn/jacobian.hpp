#pragma once

// Analytic Jacobians of the attention operators and update rules, a central
// finite-difference oracle, and dense spectral utilities.
//
// Convention: numerator layout over the token-major vectorization, so entry
// (r, c) is d vec(f(X))[r] / d vec(X)[c] with vec(X)[i*D + k] = X(i, k).
// Per-token blocks of row-local operators are contiguous D x D diagonal
// blocks.

#include <complex>
#include <functional>
#include <vector>

#include "sadyn/attention.hpp"

namespace sadyn {

enum class JacobianSource { Analytic, FiniteDifference };

struct JacobianMatrix {
  Matrix data;
  JacobianSource source = JacobianSource::Analytic;

  Index rows() const { return data.rows(); }
  Index cols() const { return data.cols(); }
  bool is_square() const { return data.rows() == data.cols(); }
};

struct SpectralSummary {
  double spectral_norm = 0.0;
  std::vector<std::complex<double>> eigenvalues;
  double max_abs_eig = 0.0;
  double max_real_part = 0.0;
};

using StateMap = std::function<TokenMatrix(const TokenMatrix&)>;

JacobianMatrix jac_pi(const TokenMatrix& y, double eps_floor = kDefaultEpsFloor);
JacobianMatrix jac_rmsnorm(const TokenMatrix& y, const NormParams& p);
/// Oscillator-wise Pi: N x N blocks along the diagonal.
JacobianMatrix jac_pi_osc(const TokenMatrix& y, Index oscillator_dim,
                          double eps_floor = kDefaultEpsFloor);

/// d vec(SA_h(X)) / d vec(X), shape (S*D_H) x (S*D).
JacobianMatrix jac_sa_head(const TokenMatrix& x, const HeadWeights& w, double beta);

/// Frozen-attention part P (x) W^V^T of the head Jacobian, with P held at its
/// value at x.
JacobianMatrix jac_sa_head_frozen(const TokenMatrix& x, const HeadWeights& w,
                                  double beta);

/// d vec(MSA(X)) / d vec(X), shape (S*D) x (S*D).
JacobianMatrix jac_msa(const TokenMatrix& x, const MSAWeights& w);

/// sum_h P_h (x) (W^V_h W^O_h)^T: the MSA Jacobian with every attention
/// matrix frozen at x. Exactly the MSA Jacobian when W^Q = W^K = 0.
JacobianMatrix jac_msa_frozen(const TokenMatrix& x, const MSAWeights& w);

JacobianMatrix jac_itrsa_step(const TokenMatrix& x, const MSAWeights& w,
                              const StepConfig& cfg);
JacobianMatrix jac_akorn_step(const TokenMatrix& x, const MSAWeights& w,
                              const OmegaBank& bank, const StepConfig& cfg);

/// Dispatches on cfg.variant. AKOrN needs a bank; ContinuousProjected is not a
/// discrete map and is rejected.
JacobianMatrix jac_step(const TokenMatrix& x, const MSAWeights& w,
                        const StepConfig& cfg, const OmegaBank* bank = nullptr);

/// Central differences (f(x + h e_c) - f(x - h e_c)) / 2h, one column per
/// state entry.
JacobianMatrix fd_jacobian(const StateMap& f, const TokenMatrix& x, double h = 1e-5);

struct PowerIterationResult {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Power iteration on M^T M. Stops once ||M^T M v - rho v|| <= tol * rho.
/// Starts from a fixed pseudo-random vector, so results are deterministic.
PowerIterationResult power_iteration(const Matrix& m, double tol = 1e-10,
                                     int max_iter = 200000);

/// Largest singular value of m. Throws NoConvergenceError if the power
/// iteration does not reach tol within max_iter.
double spectral_norm(const Matrix& m, double tol = 1e-10, int max_iter = 200000);

/// All eigenvalues (dense real Schur), the spectral norm, and the extreme
/// modulus / real part.
SpectralSummary eig_spectrum(const JacobianMatrix& j);
SpectralSummary eig_spectrum(const Matrix& m);

}  // namespace sadyn
