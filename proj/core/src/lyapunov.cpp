#include "sadyn/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "sadyn/jacobian.hpp"

namespace sadyn {

TangentMap TangentMap::linear(const Matrix& m) {
  require_shape(m.rows() == m.cols(), "linear tangent map must be square");
  return TangentMap{[m](const Vector& x) -> Vector { return m * x; },
                    [m](const Vector&) -> Matrix { return m; }};
}

TangentMap TangentMap::itrsa(const MSAWeights& w, const StepConfig& cfg, Index tokens) {
  const Index d = w.model_dim();
  return TangentMap{
      [w, cfg, tokens, d](const Vector& x) -> Vector {
        return vec(itrsa_step(unvec(x, tokens, d), w, cfg));
      },
      [w, cfg, tokens, d](const Vector& x) -> Matrix {
        return jac_itrsa_step(unvec(x, tokens, d), w, cfg).data;
      }};
}

TangentMap TangentMap::akorn(const MSAWeights& w, const OmegaBank& bank,
                             const StepConfig& cfg, Index tokens) {
  const Index d = w.model_dim();
  return TangentMap{
      [w, bank, cfg, tokens, d](const Vector& x) -> Vector {
        return vec(akorn_step(unvec(x, tokens, d), w, bank, cfg));
      },
      [w, bank, cfg, tokens, d](const Vector& x) -> Matrix {
        return jac_akorn_step(unvec(x, tokens, d), w, bank, cfg).data;
      }};
}

LyapunovSpectrum lyapunov_spectrum(const TangentMap& map, const Vector& x0,
                                   int horizon, Index basis_dim) {
  if (horizon < 1) throw Error(ErrorKind::InvalidArgument, "horizon must be >= 1");
  const Index n = x0.size();
  if (basis_dim <= 0) basis_dim = n;
  if (basis_dim > n)
    throw Error(ErrorKind::InvalidArgument, "basis_dim exceeds state dimension");

  Matrix q = Matrix::Identity(n, basis_dim);
  Vector sums = Vector::Zero(basis_dim);
  Vector x = x0;
  for (int t = 0; t < horizon; ++t) {
    const Matrix j = map.jacobian(x);
    require_shape(j.rows() == n && j.cols() == n, "tangent map Jacobian has wrong shape");
    const Matrix z = j * q;
    if (!z.allFinite())
      throw Error(ErrorKind::NonFiniteMap, "non-finite tangent vectors", std::nullopt, t);

    Eigen::HouseholderQR<Matrix> qr(z);
    const Matrix r = qr.matrixQR().topRows(basis_dim).triangularView<Eigen::Upper>();
    q = qr.householderQ() * Matrix::Identity(n, basis_dim);
    for (Index i = 0; i < basis_dim; ++i) {
      const double rii = r(i, i);
      if (std::abs(rii) < 1e-300)
        throw Error(ErrorKind::TangentCollapse, "tangent basis lost rank", i, t);
      // Flip column signs so that R has a positive diagonal.
      if (rii < 0.0) q.col(i) = -q.col(i);
      sums(i) += std::log(std::abs(rii));
    }
    x = map.step(x);
  }

  LyapunovSpectrum out;
  out.horizon = horizon;
  out.basis_dim = basis_dim;
  out.exponents.resize(static_cast<std::size_t>(basis_dim));
  for (Index i = 0; i < basis_dim; ++i)
    out.exponents[static_cast<std::size_t>(i)] = sums(i) / horizon;
  std::sort(out.exponents.begin(), out.exponents.end(), std::greater<>());
  return out;
}

ExponentSummary max_mean_exponents(const LyapunovSpectrum& s) {
  if (s.exponents.empty()) throw Error(ErrorKind::InvalidArgument, "empty spectrum");
  double total = 0.0;
  for (double e : s.exponents) total += e;
  return {s.exponents.front(), total / static_cast<double>(s.exponents.size())};
}

const char* to_string(Criticality c) {
  switch (c) {
    case Criticality::Subcritical: return "subcritical";
    case Criticality::Critical: return "critical";
    case Criticality::Supercritical: return "supercritical";
  }
  return "unknown";
}

Criticality criticality_report(const LyapunovSpectrum& s, double band) {
  if (!(band > 0.0)) throw Error(ErrorKind::InvalidArgument, "band must be positive");
  const double lmax = max_mean_exponents(s).max;
  if (std::abs(lmax) <= band) return Criticality::Critical;
  return lmax < 0.0 ? Criticality::Subcritical : Criticality::Supercritical;
}

}  // namespace sadyn
