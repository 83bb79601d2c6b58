#include "sadyn/attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sadyn {

void HeadWeights::validate() const {
  require_shape(wq.rows() == wk.rows() && wq.rows() == wv.rows(),
                "head weights disagree on model dimension");
  require_shape(wq.cols() == wk.cols(),
                "query and key projections must share the head dimension");
  require_shape(wq.cols() >= 1 && wv.cols() >= 1, "empty head projection");
  if (!wq.allFinite() || !wk.allFinite() || !wv.allFinite())
    throw Error(ErrorKind::InvalidArgument, "non-finite head weights");
}

Matrix MSAWeights::wo_block(Index h) const {
  const Index dh = heads.at(static_cast<std::size_t>(h)).wv.cols();
  Index offset = 0;
  for (Index k = 0; k < h; ++k) offset += heads[static_cast<std::size_t>(k)].wv.cols();
  return wo.middleRows(offset, dh);
}

Matrix MSAWeights::concat_value() const {
  Index width = 0;
  for (const auto& head : heads) width += head.wv.cols();
  Matrix out(model_dim(), width);
  Index offset = 0;
  for (const auto& head : heads) {
    out.middleCols(offset, head.wv.cols()) = head.wv;
    offset += head.wv.cols();
  }
  return out;
}

void MSAWeights::validate() const {
  require_shape(!heads.empty(), "MSA needs at least one head");
  Index width = 0;
  for (const auto& head : heads) {
    head.validate();
    require_shape(head.model_dim() == wo.cols(),
                  "head model dimension does not match W^O");
    width += head.wv.cols();
  }
  require_shape(width == wo.rows(),
                "W^O must have one row per concatenated value column");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw Error(ErrorKind::InvalidArgument, "beta must be positive and finite");
  if (!wo.allFinite())
    throw Error(ErrorKind::InvalidArgument, "non-finite output projection");
}

double MSAWeights::default_beta(Index head_dim) {
  return 1.0 / std::sqrt(static_cast<double>(head_dim));
}

NormParams NormParams::unit(Index dim, double eps_floor) {
  return NormParams{Vector::Ones(dim), eps_floor};
}

void OmegaBank::validate() const {
  require_shape(!omegas.empty(), "empty Omega bank");
  const Index n = oscillator_dim();
  for (const auto& om : omegas) {
    require_shape(om.rows() == n && om.cols() == n,
                  "Omega generators must all be N x N");
    const double scale = om.norm();
    if ((om + om.transpose()).norm() > 1e-12 * std::max(scale, 1e-300) &&
        scale > 0.0)
      throw Error(ErrorKind::InvalidArgument, "Omega generator is not antisymmetric");
  }
}

OmegaBank OmegaBank::zero(Index model_dim, Index oscillator_dim) {
  if (oscillator_dim < 1 || model_dim % oscillator_dim != 0)
    throw Error(ErrorKind::DivisibilityError,
                "oscillator dimension must divide the model dimension");
  OmegaBank bank;
  bank.omegas.assign(static_cast<std::size_t>(model_dim / oscillator_dim),
                     Matrix::Zero(oscillator_dim, oscillator_dim));
  return bank;
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::ItrSA: return "itrsa";
    case Variant::AKOrN: return "akorn";
    case Variant::ContinuousProjected: return "continuous";
  }
  return "unknown";
}

Variant parse_variant(const std::string& s) {
  if (s == "itrsa" || s == "ItrSA") return Variant::ItrSA;
  if (s == "akorn" || s == "AKOrN") return Variant::AKOrN;
  if (s == "continuous" || s == "ContinuousProjected")
    return Variant::ContinuousProjected;
  throw Error(ErrorKind::ConfigError, "unknown variant '" + s + "'");
}

void StepConfig::validate(Index tokens, Index model_dim) const {
  if (!(eta >= 0.0) || !std::isfinite(eta))
    throw Error(ErrorKind::InvalidArgument, "eta must be non-negative and finite");
  if (!(norm.eps_floor > 0.0))
    throw Error(ErrorKind::InvalidArgument, "eps_floor must be positive");
  if (variant == Variant::AKOrN) {
    if (oscillator_dim < 1 || model_dim % oscillator_dim != 0)
      throw Error(ErrorKind::DivisibilityError,
                  "oscillator dimension must divide the model dimension");
  }
  if (conditioning.size() != 0)
    require_shape(conditioning.rows() == tokens && conditioning.cols() == model_dim,
                  "conditioning input must match the state shape");
}

TokenMatrix StepConfig::conditioning_or_zero(Index tokens, Index model_dim) const {
  if (conditioning.size() == 0) return TokenMatrix::Zero(tokens, model_dim);
  require_shape(conditioning.rows() == tokens && conditioning.cols() == model_dim,
                "conditioning input must match the state shape");
  return conditioning;
}

Matrix softmax_rows(const Matrix& logits) {
  if (!logits.allFinite())
    throw Error(ErrorKind::NonFiniteLogits, "softmax input contains inf/nan");
  Matrix out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    double z = 0.0;
    for (Index j = 0; j < logits.cols(); ++j) {
      out(i, j) = std::exp(logits(i, j) - m);
      z += out(i, j);
    }
    out.row(i) /= z;
  }
  return out;
}

Matrix attention_matrix(const TokenMatrix& x, const HeadWeights& w, double beta) {
  require_shape(x.cols() == w.model_dim(), "state width does not match W^Q rows");
  const Matrix q = x * w.wq;
  const Matrix k = x * w.wk;
  return softmax_rows(beta * (q * k.transpose()));
}

TokenMatrix sa_head(const TokenMatrix& x, const HeadWeights& w, double beta) {
  require_shape(w.wq.rows() == w.wk.rows() && w.wq.rows() == w.wv.rows() &&
                    w.wq.cols() == w.wk.cols(),
                "inconsistent head weight shapes");
  const Matrix p = attention_matrix(x, w, beta);
  return p * (x * w.wv);
}

TokenMatrix msa(const TokenMatrix& x, const MSAWeights& w) {
  w.validate();
  require_shape(x.cols() == w.model_dim(), "state width does not match MSA");
  TokenMatrix out = TokenMatrix::Zero(x.rows(), w.model_dim());
  for (Index h = 0; h < w.head_count(); ++h) {
    const auto& head = w.heads[static_cast<std::size_t>(h)];
    out.noalias() += sa_head(x, head, w.beta) * w.wo_block(h);
  }
  return out;
}

namespace {

// Applies a per-segment normalization over contiguous width-n segments.
TokenMatrix normalize_segments(const TokenMatrix& y, Index n, double eps_floor) {
  require_shape(n >= 1 && y.cols() % n == 0, "segment width must divide D");
  const Index per_row = y.cols() / n;
  TokenMatrix out(y.rows(), y.cols());
  for (Index i = 0; i < y.rows(); ++i) {
    for (Index j = 0; j < per_row; ++j) {
      const auto seg = y.row(i).segment(j * n, n);
      const double norm = seg.norm();
      if (!(norm >= eps_floor))
        throw Error(ErrorKind::DegenerateRow, "norm below eps_floor",
                    per_row == 1 ? i : i * per_row + j);
      out.row(i).segment(j * n, n) = seg / norm;
    }
  }
  return out;
}

TokenMatrix project_segments(const TokenMatrix& x, const TokenMatrix& y, Index n) {
  require_shape(x.rows() == y.rows() && x.cols() == y.cols(),
                "projection operands must share a shape");
  require_shape(n >= 1 && y.cols() % n == 0, "segment width must divide D");
  TokenMatrix out = y;
  const Index per_row = y.cols() / n;
  for (Index i = 0; i < y.rows(); ++i) {
    for (Index j = 0; j < per_row; ++j) {
      const auto xs = x.row(i).segment(j * n, n);
      const double c = xs.dot(y.row(i).segment(j * n, n));
      out.row(i).segment(j * n, n) -= c * xs;
    }
  }
  return out;
}

}  // namespace

TokenMatrix pi_normalize(const TokenMatrix& y, double eps_floor) {
  return normalize_segments(y, y.cols(), eps_floor);
}

void require_unit_rows(const TokenMatrix& x, double tol) {
  for (Index i = 0; i < x.rows(); ++i)
    if (!(std::abs(x.row(i).norm() - 1.0) <= tol))
      throw Error(ErrorKind::NotOnSphere, "row is not unit norm", i);
}

void require_unit_oscillators(const TokenMatrix& x, Index n, double tol) {
  require_shape(n >= 1 && x.cols() % n == 0, "oscillator dim must divide D");
  const Index per_row = x.cols() / n;
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < per_row; ++j)
      if (!(std::abs(x.row(i).segment(j * n, n).norm() - 1.0) <= tol))
        throw Error(ErrorKind::NotOnSphere, "oscillator is not unit norm",
                    i * per_row + j);
}

TokenMatrix proj_tangent(const TokenMatrix& x, const TokenMatrix& y) {
  require_unit_rows(x);
  return project_segments(x, y, x.cols());
}

TokenMatrix rmsnorm(const TokenMatrix& y, const NormParams& p) {
  require_shape(p.gamma.size() == y.cols(), "gamma length must equal D");
  return pi_normalize(y, p.eps_floor) * p.gamma.asDiagonal();
}

TokenMatrix pi_normalize_osc(const TokenMatrix& y, Index n, double eps_floor) {
  return normalize_segments(y, n, eps_floor);
}

TokenMatrix proj_tangent_osc(const TokenMatrix& x, const TokenMatrix& y, Index n) {
  require_unit_oscillators(x, n);
  return project_segments(x, y, n);
}

TokenMatrix rmsnorm_osc(const TokenMatrix& y, const NormParams& p, Index n) {
  TokenMatrix out = normalize_segments(y, n, p.eps_floor);
  if (p.gamma.size() == y.cols()) return out * p.gamma.asDiagonal();
  require_shape(p.gamma.size() == n, "gamma length must be D or N");
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols() / n; ++j)
      out.row(i).segment(j * n, n).array() *= p.gamma.transpose().array();
  return out;
}

TokenMatrix omega_apply(const TokenMatrix& x, const OmegaBank& bank) {
  const Index n = bank.oscillator_dim();
  require_shape(n >= 1 && x.cols() % n == 0 && bank.slot_count() == x.cols() / n,
                "Omega bank does not match the oscillator layout");
  TokenMatrix out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < bank.slot_count(); ++j)
      out.row(i).segment(j * n, n).transpose() =
          bank.omegas[static_cast<std::size_t>(j)] *
          x.row(i).segment(j * n, n).transpose();
  return out;
}

TokenMatrix itrsa_pre_norm(const TokenMatrix& x, const MSAWeights& w,
                           const StepConfig& cfg) {
  const TokenMatrix c = cfg.conditioning_or_zero(x.rows(), x.cols());
  return x + cfg.eta * (c + msa(x, w));
}

TokenMatrix itrsa_step(const TokenMatrix& x, const MSAWeights& w,
                       const StepConfig& cfg) {
  if (cfg.variant != Variant::ItrSA)
    throw Error(ErrorKind::InvalidArgument, "itrsa_step needs the ItrSA variant");
  return rmsnorm(itrsa_pre_norm(x, w, cfg), cfg.norm);
}

TokenMatrix akorn_pre_norm(const TokenMatrix& x, const MSAWeights& w,
                           const OmegaBank& bank, const StepConfig& cfg) {
  const Index n = cfg.oscillator_dim;
  require_shape(bank.oscillator_dim() == n, "Omega bank oscillator dim mismatch");
  const TokenMatrix c = cfg.conditioning_or_zero(x.rows(), x.cols());
  const TokenMatrix delta = omega_apply(x, bank) + project_segments(x, c + msa(x, w), n);
  return x + cfg.eta * delta;
}

TokenMatrix akorn_step(const TokenMatrix& x, const MSAWeights& w,
                       const OmegaBank& bank, const StepConfig& cfg) {
  if (cfg.variant != Variant::AKOrN)
    throw Error(ErrorKind::InvalidArgument, "akorn_step needs the AKOrN variant");
  require_unit_oscillators(x, cfg.oscillator_dim);
  return pi_normalize_osc(akorn_pre_norm(x, w, bank, cfg), cfg.oscillator_dim,
                          cfg.norm.eps_floor);
}

TokenMatrix continuous_rhs(const TokenMatrix& x, const HeadWeights& w,
                           double beta) {
  require_unit_rows(x);
  return project_segments(x, sa_head(x, w, beta), x.cols());
}

TokenMatrix multihead_rhs(const TokenMatrix& x, const MSAWeights& w) {
  require_shape(!w.heads.empty(), "no heads");
  TokenMatrix out = TokenMatrix::Zero(x.rows(), w.heads.front().wv.cols());
  for (const auto& head : w.heads) {
    require_shape(head.wv.cols() == out.cols(),
                  "multi-head flow needs equal value widths");
    out += sa_head(x, head, w.beta);
  }
  return out;
}

}  // namespace sadyn
