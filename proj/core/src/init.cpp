#include "sadyn/init.hpp"

#include "sadyn/energy.hpp"

namespace sadyn {

Matrix gaussian_matrix(Index rows, Index cols, double std, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // Column-major fill keeps the draw order independent of Eigen internals.
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = std * normal(rng);
  return m;
}

Matrix random_orthogonal(Index rows, Index cols, Rng& rng) {
  const bool tall = rows >= cols;
  const Index n = tall ? rows : cols;
  const Index k = tall ? cols : rows;
  const Matrix g = gaussian_matrix(n, k, 1.0, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, k);
  // Sign-fix against R so the result is Haar distributed.
  for (Index i = 0; i < k; ++i)
    if (qr.matrixQR()(i, i) < 0.0) q.col(i) = -q.col(i);
  return tall ? q : Matrix(q.transpose());
}

MSAWeights gaussian_msa_weights(Index d, Index h, Index dh, double std, double beta,
                                Rng& rng) {
  MSAWeights w;
  for (Index k = 0; k < h; ++k) {
    HeadWeights head;
    head.wq = gaussian_matrix(d, dh, std, rng);
    head.wk = gaussian_matrix(d, dh, std, rng);
    head.wv = gaussian_matrix(d, dh, std, rng);
    w.heads.push_back(std::move(head));
  }
  w.wo = gaussian_matrix(h * dh, d, std, rng);
  w.beta = beta;
  return w;
}

OmegaBank random_omega_bank(Index d, Index n, double scale, Rng& rng) {
  if (n < 1 || d % n != 0)
    throw Error(ErrorKind::DivisibilityError, "oscillator dimension must divide D");
  OmegaBank bank;
  for (Index s = 0; s < d / n; ++s) {
    const Matrix g = gaussian_matrix(n, n, scale, rng);
    bank.omegas.push_back(0.5 * (g - g.transpose()));
  }
  return bank;
}

TokenMatrix random_tokens(Index s, Index d, double row_norm, Rng& rng) {
  TokenMatrix x = gaussian_matrix(s, d, 1.0, rng);
  for (Index i = 0; i < s; ++i) x.row(i) *= row_norm / x.row(i).norm();
  return x;
}

TokenMatrix random_unit_tokens(Index s, Index d, Rng& rng) {
  return random_tokens(s, d, 1.0, rng);
}

TokenMatrix random_unit_oscillators(Index s, Index d, Index n, Rng& rng) {
  if (n < 1 || d % n != 0)
    throw Error(ErrorKind::DivisibilityError, "oscillator dimension must divide D");
  TokenMatrix x = gaussian_matrix(s, d, 1.0, rng);
  for (Index i = 0; i < s; ++i)
    for (Index k = 0; k < d / n; ++k) x.row(i).segment(k * n, n).normalize();
  return x;
}

InitializedModel init_weights(const RunConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const Dims& dm = cfg.dims;
  const double beta = cfg.effective_beta();
  InitializedModel out;
  MSAWeights& w = out.weights;
  w.beta = beta;

  switch (cfg.init.mode) {
    case InitMode::Gaussian:
      w = gaussian_msa_weights(dm.model_dim, dm.heads, dm.head_dim, cfg.effective_std(),
                               beta, rng);
      break;
    case InitMode::Orthogonal:
      for (Index h = 0; h < dm.heads; ++h) {
        HeadWeights head;
        head.wq = random_orthogonal(dm.model_dim, dm.head_dim, rng);
        head.wk = random_orthogonal(dm.model_dim, dm.head_dim, rng);
        head.wv = random_orthogonal(dm.model_dim, dm.head_dim, rng);
        w.heads.push_back(std::move(head));
      }
      w.wo = random_orthogonal(dm.model_dim, dm.model_dim, rng);
      break;
    case InitMode::ConstrainedSingle: {
      HeadWeights head;
      head.wq = gaussian_matrix(dm.model_dim, dm.head_dim, cfg.effective_std(), rng);
      head.wk = gaussian_matrix(dm.model_dim, dm.head_dim, cfg.effective_std(), rng);
      head.wv = make_symmetric_value(head.wq, head.wk);
      w.heads.push_back(std::move(head));
      w.wo = Matrix::Identity(dm.model_dim, dm.model_dim);
      break;
    }
    case InitMode::ConstrainedMulti: {
      std::uniform_int_distribution<std::uint64_t> u;
      const OrthoHeadSet set = make_orthogonal_heads(dm.model_dim, dm.heads, u(rng));
      for (Index h = 0; h < set.head_count(); ++h) {
        const auto k = static_cast<std::size_t>(h);
        w.heads.push_back(HeadWeights{set.u1[k], set.u2[k], set.value_matrix(h)});
      }
      w.wo = Matrix::Zero(dm.heads * dm.model_dim, dm.model_dim);
      for (Index h = 0; h < dm.heads; ++h)
        w.wo.middleRows(h * dm.model_dim, dm.model_dim).setIdentity();
      break;
    }
  }
  w.validate();
  if (cfg.variant == Variant::AKOrN)
    out.bank = random_omega_bank(dm.model_dim, dm.oscillator_dim, cfg.init.omega_scale, rng);
  return out;
}

InitialState initial_state(const RunConfig& cfg, Rng& rng) {
  const Dims& dm = cfg.dims;
  const bool osc = cfg.variant == Variant::AKOrN;
  InitialState st;
  if (cfg.state.conditioning_scale > 0.0)
    st.conditioning = random_tokens(dm.tokens, dm.model_dim, cfg.state.conditioning_scale, rng);
  if (cfg.state.init == StateInit::Conditioning) {
    if (st.conditioning.size() == 0)
      throw Error(ErrorKind::ConfigError, "state.init: conditioning init needs C != 0");
    st.x0 = osc ? pi_normalize_osc(st.conditioning, dm.oscillator_dim)
                : pi_normalize(st.conditioning);
  } else {
    st.x0 = osc ? random_unit_oscillators(dm.tokens, dm.model_dim, dm.oscillator_dim, rng)
                : random_unit_tokens(dm.tokens, dm.model_dim, rng);
  }
  return st;
}

}  // namespace sadyn
