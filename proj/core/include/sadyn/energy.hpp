#pragma once

// Energy functions of symmetric-style attention flows, weight constructors
// that make them Lyapunov functions, a descent checker for the continuous
// flows, and the pseudo-energy diagnostics of looped attention.

#include <cstdint>
#include <span>
#include <vector>

#include "sadyn/attention.hpp"
#include "sadyn/jacobian.hpp"

namespace sadyn {

enum class Integrator { Euler, RK4 };

const char* to_string(Integrator i);
Integrator parse_integrator(const std::string& s);

struct EnergyReport {
  std::vector<double> times;
  std::vector<double> values;
  /// deltas[k] = values[k+1] - values[k].
  std::vector<double> deltas;
  double monotone_fraction = 1.0;
  double max_delta = 0.0;
  Integrator integrator = Integrator::RK4;
  double dt = 0.0;
};

/// 2H mutually orthonormal D x D/(2H) blocks. Head h uses
/// W^Q_h = U_{1,h}, W^K_h = U_{2,h}, so A_h = U_{1,h} U_{2,h}^T, and
/// W^V_h = (A_h + A_h^T) / 2.
struct OrthoHeadSet {
  std::vector<Matrix> u1;
  std::vector<Matrix> u2;

  Index head_count() const { return static_cast<Index>(u1.size()); }
  Index model_dim() const { return u1.empty() ? 0 : u1.front().rows(); }
  Matrix logit_matrix(Index h) const;
  Matrix value_matrix(Index h) const;
  std::vector<Matrix> logit_matrices() const;
  /// max |U_{k,h}^T U_{k',h'} - delta I| over all block pairs.
  double orthonormality_error() const;
};

/// Frobenius norms of the head-product identities used by the multi-head
/// descent argument, maximized over head pairs.
struct HeadProductNorms {
  double at_a_cross = 0.0;   // max_{h != h'} ||A_h^T A_h'||
  double a_a_cross = 0.0;    // max_{h != h'} ||A_h A_h'||
  double a_at_cross = 0.0;   // max_{h != h'} ||A_h A_h'^T||
  double a_at_same = 0.0;    // max_h ||A_h A_h^T||
};

HeadProductNorms head_product_norms(std::span<const Matrix> logit_matrices);

/// A continuous attention flow whose energy is -sum_h sum_ij exp(beta x_i^T A_h x_j)
/// with A_h = W^Q_h W^K_h^T. Value matrices may be D x D.
struct FlowSystem {
  std::vector<HeadWeights> heads;
  double beta = 1.0;
  /// true: dX/dt = Proj_X(sum_h SA_h(X)) with rows renormalized after each
  /// integrator step. false: dX/dt = sum_h SA_h(X), no projection.
  bool projected = true;

  std::vector<Matrix> logit_matrices() const;
  TokenMatrix rhs(const TokenMatrix& x) const;

  /// Single head with W^V = (W^K W^Q^T + W^Q W^K^T) / 2, projected flow.
  static FlowSystem constrained_single(const Matrix& wq, const Matrix& wk, double beta);
  /// Orthogonal heads, unprojected flow.
  static FlowSystem constrained_multi(const OrthoHeadSet& set, double beta);
};

/// Exponents above this value are treated as overflow.
inline constexpr double kEnergyExponentLimit = 700.0;

double energy_single(const TokenMatrix& x, const Matrix& a, double beta);
double energy_multi(const TokenMatrix& x, std::span<const Matrix> a, double beta);
/// log sum_h sum_ij exp(beta x_i^T A_h x_j); finite even when the energy
/// itself overflows.
double log_energy_magnitude(const TokenMatrix& x, std::span<const Matrix> a,
                            double beta);

/// Exact gradient d E_single / d X:
///   row i = -beta sum_j [exp(beta x_i^T A x_j) A x_j + exp(beta x_j^T A x_i) A^T x_j].
/// For symmetric A this is -beta sum_j exp(beta x_i^T A x_j) (A + A^T) x_j.
TokenMatrix grad_energy_single(const TokenMatrix& x, const Matrix& a, double beta);
TokenMatrix grad_energy_multi(const TokenMatrix& x, std::span<const Matrix> a,
                              double beta);

/// (W^K W^Q^T + W^Q W^K^T) / 2, symmetric by construction.
Matrix make_symmetric_value(const Matrix& wq, const Matrix& wk);

/// Orthonormalizes the columns of a seeded Gaussian D x D matrix and splits
/// them into 2H blocks of width D/(2H). Requires 2H | D.
OrthoHeadSet make_orthogonal_heads(Index d, Index head_count, std::uint64_t seed);

/// Integrates the flow from x0 (unit rows) and records the energy after
/// every step.
EnergyReport verify_descent(const TokenMatrix& x0, const FlowSystem& system,
                            double dt, int steps, Integrator integrator);

/// -Tr(X^T Y).
double pseudo_energy(const TokenMatrix& x, const TokenMatrix& y);

/// Share of ||x||^2 carried by the top max(1, floor(top_fraction * n))
/// eigenvectors of the symmetrized Jacobian J + J^T.
double contribution_index(const Vector& x_vec, const Matrix& j,
                          double top_fraction = 0.02);

struct QuadraticPseudoEnergy {
  double plain = 0.0;        // -x^T J x
  double symmetrized = 0.0;  // -x^T (J + J^T) x / 2
};

QuadraticPseudoEnergy quadratic_pseudo_energy(const Vector& x_vec, const Matrix& j_frozen);

double cosine_similarity(const Vector& a, const Vector& b);

}  // namespace sadyn
