#pragma once

// Forward operators of recurrent self-attention: softmax attention,
// multi-head attention, spherical normalization, tangent projection,
// RMSNorm, the oscillator Omega layer, and the three update rules.
//
// Every function is pure. States are S x D matrices with one token per row.

#include <vector>

#include "sadyn/common.hpp"

namespace sadyn {

struct HeadWeights {
  Matrix wq;  // D x D_H
  Matrix wk;  // D x D_H
  Matrix wv;  // D x D_H

  Index model_dim() const { return wq.rows(); }
  Index head_dim() const { return wq.cols(); }
  /// Bilinear logit matrix W^Q W^K^T (D x D).
  Matrix logit_matrix() const { return wq * wk.transpose(); }
  void validate() const;
};

struct MSAWeights {
  std::vector<HeadWeights> heads;
  /// (sum of value widths) x D. Square in the standard layout where the
  /// value widths add up to D.
  Matrix wo;
  double beta = 1.0;

  Index head_count() const { return static_cast<Index>(heads.size()); }
  Index model_dim() const { return wo.cols(); }
  Index head_dim() const { return heads.empty() ? 0 : heads.front().head_dim(); }

  /// Rows [h*D_H, (h+1)*D_H) of W^O: the part of the output projection that
  /// head h feeds into.
  Matrix wo_block(Index h) const;
  /// [W^V_1, ..., W^V_H] (D x sum of value widths).
  Matrix concat_value() const;
  void validate() const;

  static double default_beta(Index head_dim);
};

struct NormParams {
  Vector gamma;
  double eps_floor = kDefaultEpsFloor;

  static NormParams unit(Index dim, double eps_floor = kDefaultEpsFloor);
  double max_abs_gamma() const { return gamma.cwiseAbs().maxCoeff(); }
};

/// D/N antisymmetric N x N generators, one per oscillator slot.
struct OmegaBank {
  std::vector<Matrix> omegas;

  Index oscillator_dim() const {
    return omegas.empty() ? 0 : omegas.front().rows();
  }
  Index slot_count() const { return static_cast<Index>(omegas.size()); }
  void validate() const;

  static OmegaBank zero(Index model_dim, Index oscillator_dim);
};

enum class Variant { ItrSA, AKOrN, ContinuousProjected };

const char* to_string(Variant v);
Variant parse_variant(const std::string& s);

struct StepConfig {
  double eta = 1.0;
  NormParams norm;
  Variant variant = Variant::ItrSA;
  Index oscillator_dim = 4;
  /// Conditioning input C injected at every iteration. An empty matrix is
  /// treated as zero.
  TokenMatrix conditioning;

  void validate(Index tokens, Index model_dim) const;
  /// C, or a zero matrix of the requested shape when C is empty.
  TokenMatrix conditioning_or_zero(Index tokens, Index model_dim) const;
};

/// Row-wise softmax with per-row max subtraction.
Matrix softmax_rows(const Matrix& logits);

/// softmax(beta X W^Q W^K^T X^T), the S x S attention matrix of one head.
Matrix attention_matrix(const TokenMatrix& x, const HeadWeights& w, double beta);

TokenMatrix sa_head(const TokenMatrix& x, const HeadWeights& w, double beta);
TokenMatrix msa(const TokenMatrix& x, const MSAWeights& w);

TokenMatrix pi_normalize(const TokenMatrix& y,
                         double eps_floor = kDefaultEpsFloor);
TokenMatrix proj_tangent(const TokenMatrix& x, const TokenMatrix& y);
TokenMatrix rmsnorm(const TokenMatrix& y, const NormParams& p);

// Oscillator-wise variants: every row is split into D/N contiguous
// N-dimensional oscillators and the operator acts on each independently.
TokenMatrix pi_normalize_osc(const TokenMatrix& y, Index oscillator_dim,
                             double eps_floor = kDefaultEpsFloor);
TokenMatrix proj_tangent_osc(const TokenMatrix& x, const TokenMatrix& y,
                             Index oscillator_dim);
TokenMatrix rmsnorm_osc(const TokenMatrix& y, const NormParams& p,
                        Index oscillator_dim);
TokenMatrix omega_apply(const TokenMatrix& x, const OmegaBank& bank);

/// Raises NotOnSphere(i) for the first row whose norm is not 1.
void require_unit_rows(const TokenMatrix& x, double tol = kSphereTolerance);
/// Raises NotOnSphere(flat oscillator index) for the first non-unit oscillator.
void require_unit_oscillators(const TokenMatrix& x, Index oscillator_dim,
                              double tol = kSphereTolerance);

/// X' = RMSNorm(X + eta (C + MSA(X))).
TokenMatrix itrsa_step(const TokenMatrix& x, const MSAWeights& w,
                       const StepConfig& cfg);

/// Pre-normalization state X + eta (C + MSA(X)) of the ItrSA update.
TokenMatrix itrsa_pre_norm(const TokenMatrix& x, const MSAWeights& w,
                           const StepConfig& cfg);

/// Kuramoto-layer update:
///   dX = Omg(X) + Proj_X(C + MSA(X)),   X' = Pi(X + eta dX), oscillator-wise.
TokenMatrix akorn_step(const TokenMatrix& x, const MSAWeights& w,
                       const OmegaBank& bank, const StepConfig& cfg);

/// Pre-normalization state X + eta dX of the Kuramoto update. Does not check
/// the sphere constraint.
TokenMatrix akorn_pre_norm(const TokenMatrix& x, const MSAWeights& w,
                           const OmegaBank& bank, const StepConfig& cfg);

/// Right-hand side of the projected single-head flow
///   dX/dt = Proj_X(softmax(beta X W^Q W^K^T X^T) X W^V).
TokenMatrix continuous_rhs(const TokenMatrix& x, const HeadWeights& w,
                           double beta);

/// Unprojected multi-head flow dX/dt = sum_h SA_h(X).
TokenMatrix multihead_rhs(const TokenMatrix& x, const MSAWeights& w);

}  // namespace sadyn
