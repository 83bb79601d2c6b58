#include "sadyn/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sadyn {

const char* to_string(Integrator i) {
  return i == Integrator::Euler ? "euler" : "rk4";
}

Integrator parse_integrator(const std::string& s) {
  if (s == "euler" || s == "Euler") return Integrator::Euler;
  if (s == "rk4" || s == "RK4") return Integrator::RK4;
  throw Error(ErrorKind::ConfigError, "unknown integrator '" + s + "'");
}

Matrix OrthoHeadSet::logit_matrix(Index h) const {
  const auto k = static_cast<std::size_t>(h);
  return u1.at(k) * u2.at(k).transpose();
}

Matrix OrthoHeadSet::value_matrix(Index h) const {
  const Matrix a = logit_matrix(h);
  return 0.5 * (a + a.transpose());
}

std::vector<Matrix> OrthoHeadSet::logit_matrices() const {
  std::vector<Matrix> out;
  for (Index h = 0; h < head_count(); ++h) out.push_back(logit_matrix(h));
  return out;
}

double OrthoHeadSet::orthonormality_error() const {
  std::vector<const Matrix*> blocks;
  for (std::size_t h = 0; h < u1.size(); ++h) {
    blocks.push_back(&u1[h]);
    blocks.push_back(&u2[h]);
  }
  double err = 0.0;
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      Matrix g = blocks[a]->transpose() * *blocks[b];
      if (a == b) g -= Matrix::Identity(g.rows(), g.cols());
      err = std::max(err, g.cwiseAbs().maxCoeff());
    }
  }
  return err;
}

HeadProductNorms head_product_norms(std::span<const Matrix> a) {
  HeadProductNorms out;
  for (std::size_t h = 0; h < a.size(); ++h) {
    out.a_at_same = std::max(out.a_at_same, (a[h] * a[h].transpose()).norm());
    for (std::size_t g = 0; g < a.size(); ++g) {
      if (g == h) continue;
      out.at_a_cross = std::max(out.at_a_cross, (a[h].transpose() * a[g]).norm());
      out.a_a_cross = std::max(out.a_a_cross, (a[h] * a[g]).norm());
      out.a_at_cross = std::max(out.a_at_cross, (a[h] * a[g].transpose()).norm());
    }
  }
  return out;
}

std::vector<Matrix> FlowSystem::logit_matrices() const {
  std::vector<Matrix> out;
  for (const auto& h : heads) out.push_back(h.logit_matrix());
  return out;
}

TokenMatrix FlowSystem::rhs(const TokenMatrix& x) const {
  require_shape(!heads.empty(), "flow system has no heads");
  TokenMatrix out = TokenMatrix::Zero(x.rows(), x.cols());
  for (const auto& h : heads) {
    require_shape(h.wv.cols() == x.cols(), "flow value matrices must be D x D");
    out += sa_head(x, h, beta);
  }
  if (projected) {
    // (I - x x^T) y row-wise. Stage points of the integrator sit slightly off
    // the sphere, so the unit-row check of proj_tangent is not applied here.
    for (Index i = 0; i < x.rows(); ++i)
      out.row(i) -= x.row(i).dot(out.row(i)) * x.row(i);
  }
  return out;
}

FlowSystem FlowSystem::constrained_single(const Matrix& wq, const Matrix& wk,
                                          double beta) {
  FlowSystem sys;
  sys.heads.push_back(HeadWeights{wq, wk, make_symmetric_value(wq, wk)});
  sys.beta = beta;
  sys.projected = true;
  return sys;
}

FlowSystem FlowSystem::constrained_multi(const OrthoHeadSet& set, double beta) {
  FlowSystem sys;
  for (Index h = 0; h < set.head_count(); ++h) {
    const auto k = static_cast<std::size_t>(h);
    sys.heads.push_back(HeadWeights{set.u1[k], set.u2[k], set.value_matrix(h)});
  }
  sys.beta = beta;
  sys.projected = false;
  return sys;
}

namespace {

void require_square_logit(const TokenMatrix& x, const Matrix& a) {
  require_shape(a.rows() == x.cols() && a.cols() == x.cols(),
                "logit matrix must be D x D");
}

}  // namespace

double log_energy_magnitude(const TokenMatrix& x, std::span<const Matrix> a,
                            double beta) {
  double top = -std::numeric_limits<double>::infinity();
  std::vector<Matrix> exps;
  for (const auto& ah : a) {
    require_square_logit(x, ah);
    exps.push_back(beta * (x * ah * x.transpose()));
    top = std::max(top, exps.back().maxCoeff());
  }
  double sum = 0.0;
  for (const auto& e : exps) sum += (e.array() - top).exp().sum();
  return top + std::log(sum);
}

double energy_multi(const TokenMatrix& x, std::span<const Matrix> a, double beta) {
  if (!x.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite state");
  double total = 0.0;
  for (const auto& ah : a) {
    require_square_logit(x, ah);
    const Matrix e = beta * (x * ah * x.transpose());
    if (e.maxCoeff() > kEnergyExponentLimit)
      throw EnergyOverflowError(log_energy_magnitude(x, a, beta));
    total -= e.array().exp().sum();
  }
  return total;
}

double energy_single(const TokenMatrix& x, const Matrix& a, double beta) {
  return energy_multi(x, std::span<const Matrix>(&a, 1), beta);
}

TokenMatrix grad_energy_single(const TokenMatrix& x, const Matrix& a, double beta) {
  require_square_logit(x, a);
  const Matrix logits = beta * (x * a * x.transpose());
  if (logits.maxCoeff() > kEnergyExponentLimit)
    throw EnergyOverflowError(log_energy_magnitude(x, std::span<const Matrix>(&a, 1), beta));
  const Matrix e = logits.array().exp().matrix();  // e(i,j) = exp(beta x_i^T A x_j)
  // Row i: -beta [sum_j e_ij (A x_j)^T + sum_j e_ji (A^T x_j)^T].
  return -beta * (e * x * a.transpose() + e.transpose() * x * a);
}

TokenMatrix grad_energy_multi(const TokenMatrix& x, std::span<const Matrix> a,
                              double beta) {
  TokenMatrix g = TokenMatrix::Zero(x.rows(), x.cols());
  for (const auto& ah : a) g += grad_energy_single(x, ah, beta);
  return g;
}

Matrix make_symmetric_value(const Matrix& wq, const Matrix& wk) {
  require_shape(wq.rows() == wk.rows() && wq.cols() == wk.cols(),
                "W^Q and W^K must have the same shape");
  const Matrix a = wq * wk.transpose();
  return 0.5 * (a.transpose() + a);
}

OrthoHeadSet make_orthogonal_heads(Index d, Index head_count, std::uint64_t seed) {
  if (head_count < 1 || d < 2 * head_count || d % (2 * head_count) != 0)
    throw Error(ErrorKind::DivisibilityError, "2H must divide D");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(d, d);
  for (Index c = 0; c < d; ++c)
    for (Index r = 0; r < d; ++r) g(r, c) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ() * Matrix::Identity(d, d);

  const Index width = d / (2 * head_count);
  OrthoHeadSet set;
  for (Index h = 0; h < head_count; ++h) {
    set.u1.push_back(q.middleCols((2 * h) * width, width));
    set.u2.push_back(q.middleCols((2 * h + 1) * width, width));
  }
  return set;
}

EnergyReport verify_descent(const TokenMatrix& x0, const FlowSystem& system,
                            double dt, int steps, Integrator integrator) {
  if (!(dt > 0.0) || steps < 1)
    throw Error(ErrorKind::InvalidArgument, "need dt > 0 and at least one step");
  require_unit_rows(x0);
  const std::vector<Matrix> logits = system.logit_matrices();
  const auto energy = [&](const TokenMatrix& x) {
    return energy_multi(x, logits, system.beta);
  };

  EnergyReport report;
  report.integrator = integrator;
  report.dt = dt;
  report.times.reserve(static_cast<std::size_t>(steps) + 1);
  report.values.reserve(static_cast<std::size_t>(steps) + 1);

  TokenMatrix x = x0;
  report.times.push_back(0.0);
  report.values.push_back(energy(x));
  for (int t = 1; t <= steps; ++t) {
    if (integrator == Integrator::Euler) {
      x = x + dt * system.rhs(x);
    } else {
      const TokenMatrix k1 = system.rhs(x);
      const TokenMatrix k2 = system.rhs(x + 0.5 * dt * k1);
      const TokenMatrix k3 = system.rhs(x + 0.5 * dt * k2);
      const TokenMatrix k4 = system.rhs(x + dt * k3);
      x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (system.projected) x = pi_normalize(x);
    if (!x.allFinite() || x.rowwise().norm().maxCoeff() > 1e8)
      throw Error(ErrorKind::DivergedAt, "integration blew up", std::nullopt, t);
    report.times.push_back(t * dt);
    report.values.push_back(energy(x));
  }

  std::size_t non_increasing = 0;
  report.deltas.resize(report.values.size() - 1);
  report.max_delta = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < report.values.size(); ++k) {
    report.deltas[k] = report.values[k + 1] - report.values[k];
    if (report.deltas[k] <= 0.0) ++non_increasing;
    report.max_delta = std::max(report.max_delta, report.deltas[k]);
  }
  report.monotone_fraction =
      static_cast<double>(non_increasing) / static_cast<double>(report.deltas.size());
  return report;
}

double pseudo_energy(const TokenMatrix& x, const TokenMatrix& y) {
  require_shape(x.rows() == y.rows() && x.cols() == y.cols(),
                "pseudo-energy operands must share a shape");
  return -(x.array() * y.array()).sum();
}

double contribution_index(const Vector& x_vec, const Matrix& j, double top_fraction) {
  require_shape(j.rows() == j.cols() && j.rows() == x_vec.size(),
                "Jacobian and state must have matching dimension");
  if (!(top_fraction > 0.0 && top_fraction <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "top_fraction must be in (0, 1]");
  const Matrix sym = j + j.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::EigFailure, "symmetric eigensolver failed");
  // Eigen returns eigenvalues in ascending order.
  const Vector coeffs = solver.eigenvectors().transpose() * x_vec;
  const Index n = x_vec.size();
  const Index k = std::max<Index>(
      1, static_cast<Index>(std::floor(top_fraction * static_cast<double>(n))));
  const double total = coeffs.squaredNorm();
  if (total == 0.0) return 0.0;
  return coeffs.tail(k).squaredNorm() / total;
}

QuadraticPseudoEnergy quadratic_pseudo_energy(const Vector& x_vec, const Matrix& j) {
  require_shape(j.rows() == j.cols() && j.rows() == x_vec.size(),
                "Jacobian and state must have matching dimension");
  QuadraticPseudoEnergy out;
  out.plain = -x_vec.dot(j * x_vec);
  out.symmetrized = -0.5 * x_vec.dot((j + j.transpose()) * x_vec);
  return out;
}

double cosine_similarity(const Vector& a, const Vector& b) {
  require_shape(a.size() == b.size(), "cosine similarity needs equal lengths");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

}  // namespace sadyn
