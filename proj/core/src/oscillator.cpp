#include "sadyn/oscillator.hpp"

#include <algorithm>
#include <cmath>

namespace sadyn {

const char* to_string(OscVariant v) {
  switch (v) {
    case OscVariant::Continuous: return "continuous";
    case OscVariant::DiscretePlain: return "plain";
    case OscVariant::DiscreteNormalized: return "normalized";
  }
  return "unknown";
}

OscVariant parse_osc_variant(const std::string& s) {
  if (s == "continuous") return OscVariant::Continuous;
  if (s == "plain") return OscVariant::DiscretePlain;
  if (s == "normalized") return OscVariant::DiscreteNormalized;
  throw Error(ErrorKind::ConfigError, "unknown oscillator variant '" + s + "'");
}

void OscSystem::validate() const {
  require_shape(omega.rows() == omega.cols() && omega.rows() >= 1,
                "Omega must be square and non-empty");
  if (!omega.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite Omega");
  if ((omega + omega.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorKind::InvalidArgument, "Omega must be antisymmetric");
  if (variant != OscVariant::Continuous && !(eta > 0.0 && std::isfinite(eta)))
    throw Error(ErrorKind::InvalidArgument, "eta must be positive for discrete variants");
}

Matrix rotation_generator(const std::vector<double>& omegas) {
  const auto n = static_cast<Index>(omegas.size());
  Matrix m = Matrix::Zero(2 * n, 2 * n);
  for (Index k = 0; k < n; ++k) {
    m(2 * k, 2 * k + 1) = omegas[static_cast<std::size_t>(k)];
    m(2 * k + 1, 2 * k) = -omegas[static_cast<std::size_t>(k)];
  }
  return m;
}

bool is_degenerate(const Matrix& omega, double rel_tol) {
  const Vector sv = Eigen::JacobiSVD<Matrix>(omega).singularValues();
  const double top = sv.maxCoeff();
  if (top == 0.0) return true;
  return (sv.array() - top).abs().maxCoeff() <= rel_tol * top;
}

namespace {

Matrix step_matrix(const OscSystem& sys) {
  Matrix m = sys.eta * sys.omega;
  m.diagonal().array() += 1.0;
  return m;
}

}  // namespace

Vector osc_apply(const OscSystem& sys, const Vector& x) {
  sys.validate();
  require_shape(x.size() == sys.dim(), "state length must match Omega");
  switch (sys.variant) {
    case OscVariant::Continuous:
      return sys.omega * x;
    case OscVariant::DiscretePlain:
      return step_matrix(sys) * x;
    case OscVariant::DiscreteNormalized: {
      const Vector y = step_matrix(sys) * x;
      const double n = y.norm();
      if (!(n > kDefaultEpsFloor))
        throw Error(ErrorKind::DegenerateRow, "oscillator update vanished", 0);
      return y / n;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown oscillator variant");
}

Vector osc_step(const OscSystem& sys, const Vector& x) {
  if (sys.variant == OscVariant::DiscreteNormalized && std::abs(x.norm() - 1.0) > kSphereTolerance)
    throw Error(ErrorKind::NotOnSphere, "normalized oscillator needs a unit state", 0);
  return osc_apply(sys, x);
}

JacobianMatrix osc_jacobian(const OscSystem& sys, const Vector& x) {
  sys.validate();
  require_shape(x.size() == sys.dim(), "state length must match Omega");
  switch (sys.variant) {
    case OscVariant::Continuous:
      return {sys.omega, JacobianSource::Analytic};
    case OscVariant::DiscretePlain:
      return {step_matrix(sys), JacobianSource::Analytic};
    case OscVariant::DiscreteNormalized: {
      const Matrix a = step_matrix(sys);
      const Vector y = a * x;
      const double n2 = y.squaredNorm();
      if (!(std::sqrt(n2) > kDefaultEpsFloor))
        throw Error(ErrorKind::DegenerateRow, "oscillator update vanished", 0);
      Matrix proj = -y * y.transpose() / n2;
      proj.diagonal().array() += 1.0;
      return {proj * a / std::sqrt(n2), JacobianSource::Analytic};
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown oscillator variant");
}

OscEigenCheck osc_eigen_check(const OscSystem& sys, const Vector& x) {
  OscEigenCheck out;
  out.spectrum = eig_spectrum(osc_jacobian(sys, x));
  out.min_abs_eig = std::numeric_limits<double>::infinity();
  for (const auto& l : out.spectrum.eigenvalues) {
    out.min_abs_eig = std::min(out.min_abs_eig, std::abs(l));
    out.max_abs_real = std::max(out.max_abs_real, std::abs(l.real()));
  }
  out.degenerate = is_degenerate(sys.omega);
  switch (sys.variant) {
    case OscVariant::Continuous:
      out.verdict = out.max_abs_real <= 1e-10;
      break;
    case OscVariant::DiscretePlain:
      out.verdict = out.min_abs_eig >= 1.0 - 1e-10;
      break;
    case OscVariant::DiscreteNormalized:
      if (out.degenerate) out.verdict = out.spectrum.spectral_norm <= 1.0 + 1e-10;
      break;
  }
  return out;
}

std::vector<PhaseCell> phase_scan(const std::vector<double>& eta_grid,
                                  const std::vector<double>& omega_grid,
                                  OscVariant variant, Index dim) {
  if (dim < 2 || dim % 2 != 0)
    throw Error(ErrorKind::InvalidArgument, "phase scan dimension must be even");
  const Vector x = Vector::Ones(dim) / std::sqrt(static_cast<double>(dim));
  std::vector<PhaseCell> cells;
  cells.reserve(eta_grid.size() * omega_grid.size());
  for (double eta : eta_grid) {
    for (double w : omega_grid) {
      if (!(eta > 0.0) || !(w > 0.0))
        throw Error(ErrorKind::InvalidArgument, "phase scan grids must be positive");
      OscSystem sys{rotation_generator(std::vector<double>(static_cast<std::size_t>(dim / 2), w)),
                    eta, variant};
      const SpectralSummary s = eig_spectrum(osc_jacobian(sys, x));
      cells.push_back({eta, w, s.max_abs_eig, s.spectral_norm, is_degenerate(sys.omega)});
    }
  }
  return cells;
}

}  // namespace sadyn
