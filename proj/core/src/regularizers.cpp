#include "sadyn/regularizers.hpp"

#include <algorithm>
#include <cmath>

#include "sadyn/jacobian.hpp"

namespace sadyn {

namespace {

double antisymmetric_energy(const Matrix& m) {
  return (m - m.transpose()).squaredNorm();
}

double sigma_penalty(double sigma) {
  const double d = sigma * sigma - 1.0;
  return d * d;
}

double gram_deviation(const Matrix& m) {
  return (m.transpose() * m - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

double r_e_multi(const MSAWeights& w) {
  const Matrix wv = w.concat_value();
  require_shape(wv.cols() == w.wo.rows() && wv.rows() == w.wo.cols(),
                "concatenated W^V width must equal D");
  return antisymmetric_energy(wv * w.wo);
}

double r_e_single(const MSAWeights& w) {
  if (w.head_count() != 1)
    throw Error(ErrorKind::HeadCountError, "single-head regularizer needs H = 1");
  return r_e_multi(w);
}

double r_spec(const std::vector<Matrix>& matrices, const std::vector<Vector>& biases) {
  double total = 0.0;
  for (const auto& m : matrices) total += sigma_penalty(spectral_norm(m));
  for (const auto& b : biases) {
    const double n2 = b.squaredNorm();
    total += n2 * n2;
  }
  return total;
}

namespace {

std::vector<std::pair<std::string, Matrix>> named_matrices(const MSAWeights& w) {
  std::vector<std::pair<std::string, Matrix>> out;
  for (Index h = 0; h < w.head_count(); ++h) {
    const auto& head = w.heads[static_cast<std::size_t>(h)];
    const std::string idx = "[" + std::to_string(h) + "]";
    out.emplace_back("wq" + idx, head.wq);
    out.emplace_back("wk" + idx, head.wk);
    out.emplace_back("wv" + idx, head.wv);
  }
  out.emplace_back("wo", w.wo);
  return out;
}

}  // namespace

double r_spec(const MSAWeights& w, const std::vector<Vector>& biases) {
  std::vector<Matrix> mats;
  for (auto& [name, m] : named_matrices(w)) mats.push_back(std::move(m));
  return r_spec(mats, biases);
}

std::map<std::string, Matrix> regularizer_fd_gradient(
    const MSAWeights& w, const std::function<double(const MSAWeights&)>& regularizer, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "FD step must be positive");
  std::map<std::string, Matrix> grads;
  MSAWeights probe = w;
  const auto differentiate = [&](const std::string& name, Matrix& m) {
    Matrix g(m.rows(), m.cols());
    for (Index c = 0; c < m.cols(); ++c) {
      for (Index r = 0; r < m.rows(); ++r) {
        const double saved = m(r, c);
        m(r, c) = saved + h;
        const double up = regularizer(probe);
        m(r, c) = saved - h;
        const double down = regularizer(probe);
        m(r, c) = saved;
        g(r, c) = (up - down) / (2.0 * h);
      }
    }
    grads[name] = std::move(g);
  };
  for (std::size_t k = 0; k < probe.heads.size(); ++k) {
    const std::string idx = "[" + std::to_string(k) + "]";
    differentiate("wq" + idx, probe.heads[k].wq);
    differentiate("wk" + idx, probe.heads[k].wk);
    differentiate("wv" + idx, probe.heads[k].wv);
  }
  differentiate("wo", probe.wo);
  return grads;
}

RegularizerReport regularizer_report(const MSAWeights& w, const std::vector<Vector>& biases) {
  RegularizerReport rep;
  rep.r_e_multi = r_e_multi(w);
  if (w.head_count() == 1) rep.r_e_single = r_e_single(w);
  double spec = 0.0;
  for (const auto& [name, m] : named_matrices(w)) {
    const double s = spectral_norm(m);
    rep.per_matrix_sigmas[name] = s;
    spec += sigma_penalty(s);
  }
  for (const auto& b : biases) spec += b.squaredNorm() * b.squaredNorm();
  rep.r_spec = spec;
  rep.orthogonality_deviation =
      std::max(gram_deviation(w.concat_value()), gram_deviation(w.wo));
  return rep;
}

}  // namespace sadyn
