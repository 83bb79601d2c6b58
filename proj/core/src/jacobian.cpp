#include "sadyn/jacobian.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

namespace sadyn {

namespace {

// blockdiag over width-n segments of 1/||y|| diag(g) (I - y y^T / ||y||^2),
// where g is either empty (identity) or a length-n (or length-D) scale.
Matrix normalize_jacobian(const TokenMatrix& y, Index n, double eps_floor,
                          const Vector* gamma) {
  require_shape(n >= 1 && y.cols() % n == 0, "segment width must divide D");
  const Index dim = y.size();
  const Index per_row = y.cols() / n;
  Matrix j = Matrix::Zero(dim, dim);
  for (Index i = 0; i < y.rows(); ++i) {
    for (Index s = 0; s < per_row; ++s) {
      const Vector seg = y.row(i).segment(s * n, n).transpose();
      const double norm = seg.norm();
      if (!(norm >= eps_floor))
        throw Error(ErrorKind::DegenerateRow, "norm below eps_floor",
                    per_row == 1 ? i : i * per_row + s);
      Matrix block = Matrix::Identity(n, n) - seg * seg.transpose() / (norm * norm);
      block /= norm;
      if (gamma != nullptr) {
        const Vector g = gamma->size() == n ? *gamma : gamma->segment(s * n, n);
        block = g.asDiagonal() * block;
      }
      const Index off = i * y.cols() + s * n;
      j.block(off, off, n, n) = block;
    }
  }
  return j;
}

// Left-multiplies a block-diagonal matrix (n x n blocks) into m without
// forming the dense product.
Matrix blockdiag_times(const Matrix& blockdiag, Index n, const Matrix& m) {
  Matrix out(blockdiag.rows(), m.cols());
  for (Index off = 0; off < blockdiag.rows(); off += n)
    out.middleRows(off, n).noalias() = blockdiag.block(off, off, n, n) * m.middleRows(off, n);
  return out;
}

}  // namespace

JacobianMatrix jac_pi(const TokenMatrix& y, double eps_floor) {
  return {normalize_jacobian(y, y.cols(), eps_floor, nullptr),
          JacobianSource::Analytic};
}

JacobianMatrix jac_rmsnorm(const TokenMatrix& y, const NormParams& p) {
  require_shape(p.gamma.size() == y.cols(), "gamma length must equal D");
  return {normalize_jacobian(y, y.cols(), p.eps_floor, &p.gamma),
          JacobianSource::Analytic};
}

JacobianMatrix jac_pi_osc(const TokenMatrix& y, Index oscillator_dim,
                          double eps_floor) {
  return {normalize_jacobian(y, oscillator_dim, eps_floor, nullptr),
          JacobianSource::Analytic};
}

JacobianMatrix jac_sa_head(const TokenMatrix& x, const HeadWeights& w, double beta) {
  w.validate();
  require_shape(x.cols() == w.model_dim(), "state width does not match head");
  const Index s = x.rows();
  const Index d = x.cols();
  const Index dh = w.wv.cols();

  const Matrix a = w.logit_matrix();
  const Matrix p = attention_matrix(x, w, beta);
  const Matrix v = x * w.wv;             // S x D_H
  const Matrix k = x * a.transpose();    // row l = (A x_l)^T
  const Matrix at_x = x * a;             // row i = (A^T x_i)^T
  const Matrix wvt = w.wv.transpose();   // D_H x D

  Matrix j(s * dh, s * d);
  for (Index i = 0; i < s; ++i) {
    const Vector pi = p.row(i).transpose();
    // M_i = V^T (diag(p_i) - p_i p_i^T), D_H x S.
    const Vector vbar = v.transpose() * pi;
    Matrix mi = v.transpose() * pi.asDiagonal();
    mi.noalias() -= vbar * pi.transpose();
    const Matrix diag_term = beta * (mi * k);
    for (Index m = 0; m < s; ++m) {
      auto block = j.block(i * dh, m * d, dh, d);
      block = p(i, m) * wvt;
      block.noalias() += beta * mi.col(m) * at_x.row(i);
      if (i == m) block += diag_term;
    }
  }
  return {std::move(j), JacobianSource::Analytic};
}

JacobianMatrix jac_sa_head_frozen(const TokenMatrix& x, const HeadWeights& w,
                                  double beta) {
  const Matrix p = attention_matrix(x, w, beta);
  return {Eigen::kroneckerProduct(p, w.wv.transpose()).eval(), JacobianSource::Analytic};
}

JacobianMatrix jac_msa(const TokenMatrix& x, const MSAWeights& w) {
  w.validate();
  const Index s = x.rows();
  const Index d = x.cols();
  Matrix j = Matrix::Zero(s * d, s * d);
  for (Index h = 0; h < w.head_count(); ++h) {
    const auto& head = w.heads[static_cast<std::size_t>(h)];
    const Index dh = head.wv.cols();
    const Matrix jh = jac_sa_head(x, head, w.beta).data;
    const Matrix wot = w.wo_block(h).transpose();  // D x D_H
    for (Index i = 0; i < s; ++i)
      j.middleRows(i * d, d).noalias() += wot * jh.middleRows(i * dh, dh);
  }
  return {std::move(j), JacobianSource::Analytic};
}

JacobianMatrix jac_msa_frozen(const TokenMatrix& x, const MSAWeights& w) {
  w.validate();
  const Index s = x.rows();
  const Index d = x.cols();
  Matrix j = Matrix::Zero(s * d, s * d);
  for (Index h = 0; h < w.head_count(); ++h) {
    const auto& head = w.heads[static_cast<std::size_t>(h)];
    const Matrix p = attention_matrix(x, head, w.beta);
    const Matrix vo_t = (head.wv * w.wo_block(h)).transpose();
    j += Eigen::kroneckerProduct(p, vo_t).eval();
  }
  return {std::move(j), JacobianSource::Analytic};
}

JacobianMatrix jac_itrsa_step(const TokenMatrix& x, const MSAWeights& w,
                              const StepConfig& cfg) {
  cfg.validate(x.rows(), x.cols());
  const TokenMatrix y = itrsa_pre_norm(x, w, cfg);
  const Matrix jn = jac_rmsnorm(y, cfg.norm).data;
  Matrix inner = cfg.eta * jac_msa(x, w).data;
  inner.diagonal().array() += 1.0;
  return {blockdiag_times(jn, x.cols(), inner), JacobianSource::Analytic};
}

JacobianMatrix jac_akorn_step(const TokenMatrix& x, const MSAWeights& w,
                              const OmegaBank& bank, const StepConfig& cfg) {
  cfg.validate(x.rows(), x.cols());
  const Index n = cfg.oscillator_dim;
  require_shape(bank.oscillator_dim() == n, "Omega bank oscillator dim mismatch");
  require_unit_oscillators(x, n);

  const Index d = x.cols();
  const Index dim = x.size();
  const Index slots = d / n;
  const TokenMatrix target = cfg.conditioning_or_zero(x.rows(), d) + msa(x, w);
  const Matrix jm = jac_msa(x, w).data;

  // d Proj_X(Y)/dX = B_x dY/dX - blockdiag((x.y) I + x y^T) over oscillators,
  // and d Omg/dX = blockdiag(Omega_j).
  Matrix bx = Matrix::Zero(dim, dim);
  Matrix local = Matrix::Zero(dim, dim);
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index s = 0; s < slots; ++s) {
      const Vector xs = x.row(i).segment(s * n, n).transpose();
      const Vector ys = target.row(i).segment(s * n, n).transpose();
      const Index off = i * d + s * n;
      bx.block(off, off, n, n) = Matrix::Identity(n, n) - xs * xs.transpose();
      local.block(off, off, n, n) = bank.omegas[static_cast<std::size_t>(s)] -
                                    xs.dot(ys) * Matrix::Identity(n, n) -
                                    xs * ys.transpose();
    }
  }
  Matrix inner = blockdiag_times(bx, n, jm) + local;
  inner *= cfg.eta;
  inner.diagonal().array() += 1.0;

  const TokenMatrix y = akorn_pre_norm(x, w, bank, cfg);
  const Matrix jn = jac_pi_osc(y, n, cfg.norm.eps_floor).data;
  return {blockdiag_times(jn, n, inner), JacobianSource::Analytic};
}

JacobianMatrix jac_step(const TokenMatrix& x, const MSAWeights& w,
                        const StepConfig& cfg, const OmegaBank* bank) {
  switch (cfg.variant) {
    case Variant::ItrSA:
      return jac_itrsa_step(x, w, cfg);
    case Variant::AKOrN:
      if (bank == nullptr)
        throw Error(ErrorKind::InvalidArgument, "AKOrN Jacobian needs an Omega bank");
      return jac_akorn_step(x, w, *bank, cfg);
    case Variant::ContinuousProjected:
      break;
  }
  throw Error(ErrorKind::InvalidArgument,
              "the continuous variant has no discrete step Jacobian");
}

JacobianMatrix fd_jacobian(const StateMap& f, const TokenMatrix& x, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "FD step must be positive");
  const Index cols = x.cols();
  Matrix j;
  TokenMatrix probe = x;
  for (Index c = 0; c < x.size(); ++c) {
    const Index row = c / cols;
    const Index col = c % cols;
    const double orig = probe(row, col);
    probe(row, col) = orig + h;
    const TokenMatrix fp = f(probe);
    probe(row, col) = orig - h;
    const TokenMatrix fm = f(probe);
    probe(row, col) = orig;
    if (!fp.allFinite() || !fm.allFinite())
      throw Error(ErrorKind::NonFiniteMap, "map produced inf/nan", c);
    if (c == 0) j.resize(fp.size(), x.size());
    j.col(c) = (vec(fp) - vec(fm)) / (2.0 * h);
  }
  return {std::move(j), JacobianSource::FiniteDifference};
}

PowerIterationResult power_iteration(const Matrix& m, double tol, int max_iter) {
  PowerIterationResult result;
  if (!m.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite matrix");
  if (m.size() == 0) {
    result.converged = true;
    return result;
  }
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(m.cols());
  for (Index k = 0; k < v.size(); ++k) v(k) = normal(rng);
  v.normalize();

  Vector w(m.rows());
  Vector u(m.cols());
  for (int it = 1; it <= max_iter; ++it) {
    w.noalias() = m * v;
    u.noalias() = m.transpose() * w;
    // Divide by ||v|| rather than assume it is exactly 1 after normalize().
    result.iterations = it;
    result.value = w.norm() / v.norm();
    const double rho = result.value * result.value;
    if (rho == 0.0) {
      // v is in the null space; a zero matrix is the only way to stay here
      // from a generic start.
      if (m.norm() == 0.0) {
        result.residual = 0.0;
        result.converged = true;
        return result;
      }
      v.setOnes();
      v.normalize();
      continue;
    }
    result.residual = (u - rho * v).norm() / rho;
    if (result.residual <= tol) {
      result.converged = true;
      return result;
    }
    v = u / u.norm();
  }
  return result;
}

double spectral_norm(const Matrix& m, double tol, int max_iter) {
  const auto r = power_iteration(m, tol, max_iter);
  if (!r.converged) throw NoConvergenceError(r.value, r.iterations, r.residual);
  return r.value;
}

SpectralSummary eig_spectrum(const Matrix& m) {
  require_shape(m.rows() == m.cols(), "eigenvalues need a square matrix");
  SpectralSummary out;
  if (m.size() == 0) return out;
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::EigFailure, "real Schur decomposition failed");
  const auto& ev = solver.eigenvalues();
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  out.max_abs_eig = 0.0;
  out.max_real_part = -std::numeric_limits<double>::infinity();
  for (const auto& l : out.eigenvalues) {
    out.max_abs_eig = std::max(out.max_abs_eig, std::abs(l));
    out.max_real_part = std::max(out.max_real_part, l.real());
  }
  out.spectral_norm = spectral_norm(m);
  return out;
}

SpectralSummary eig_spectrum(const JacobianMatrix& j) { return eig_spectrum(j.data); }

}  // namespace sadyn
