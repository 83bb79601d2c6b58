#include "sadyn/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sadyn/init.hpp"
#include "sadyn/jacobian.hpp"

namespace sadyn {
namespace {

using oracle::gaussian;

Matrix Rotation(double theta) {
  return (Matrix(2, 2) << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta))
      .finished();
}

// x -> x + eps * tanh(W x + b): smooth, nonlinear, Jacobian close to I.
TangentMap TanhMap(const Matrix& w, const Vector& b, double eps) {
  return TangentMap{
      [=](const Vector& x) -> Vector { return x + eps * (w * x + b).array().tanh().matrix(); },
      [=](const Vector& x) -> Matrix {
        const Vector s = (1.0 - (w * x + b).array().tanh().square()).matrix();
        Matrix j = eps * (s.asDiagonal() * w);
        j.diagonal().array() += 1.0;
        return j;
      }};
}

// x -> P (x + eps sin x) with a random signed permutation P.
TangentMap SignedPermutationMap(Index n, double eps, std::mt19937_64& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  Matrix p = Matrix::Zero(n, n);
  std::bernoulli_distribution coin(0.5);
  for (Index i = 0; i < n; ++i) p(i, idx[static_cast<std::size_t>(i)]) = coin(rng) ? 1.0 : -1.0;
  return TangentMap{
      [=](const Vector& x) -> Vector { return p * (x + eps * x.array().sin().matrix()); },
      [=](const Vector& x) -> Matrix {
        return p * (1.0 + eps * x.array().cos()).matrix().asDiagonal();
      }};
}

std::vector<Matrix> JacobiansAlong(const TangentMap& m, Vector x, int horizon) {
  std::vector<Matrix> js;
  for (int t = 0; t < horizon; ++t) {
    js.push_back(m.jacobian(x));
    x = m.step(x);
  }
  return js;
}

TEST(LyapunovSpectrum, DiagonalLinearMap) {
  const Matrix m = Eigen::Vector2d(2.0, 0.5).asDiagonal();
  const LyapunovSpectrum s = lyapunov_spectrum(TangentMap::linear(m), Vector::Ones(2));
  ASSERT_EQ(s.exponents.size(), 2u);
  EXPECT_NEAR(s.exponents[0], std::log(2.0), 1e-12);
  EXPECT_NEAR(s.exponents[1], std::log(0.5), 1e-12);
  EXPECT_EQ(s.horizon, kDefaultHorizon);
  EXPECT_EQ(s.basis_dim, 2);
}

TEST(LyapunovSpectrum, IsometriesHaveZeroExponents) {
  const LyapunovSpectrum id = lyapunov_spectrum(TangentMap::linear(Matrix::Identity(3, 3)),
                                                Vector::Zero(3));
  for (double e : id.exponents) EXPECT_EQ(e, 0.0);
  const LyapunovSpectrum rot = lyapunov_spectrum(TangentMap::linear(Rotation(0.7)), Vector::Ones(2));
  for (double e : rot.exponents) EXPECT_NEAR(e, 0.0, 1e-10);

  Eigen::PermutationMatrix<Eigen::Dynamic> p(4);
  p.indices() << 2, 0, 3, 1;
  Matrix rp = Matrix::Identity(4, 4);
  rp.topLeftCorner(2, 2) = Rotation(1.1);
  const LyapunovSpectrum mix =
      lyapunov_spectrum(TangentMap::linear(Matrix(p) * rp), Vector::Ones(4), 16);
  for (double e : mix.exponents) EXPECT_NEAR(e, 0.0, 1e-10);
}

TEST(LyapunovSpectrum, HorizonIndependentForConstantJacobian) {
  // The QR recursion starts from the identity basis, so a constant upper
  // triangular Jacobian reproduces the same R every step.
  std::mt19937_64 rng(60);
  Matrix m = gaussian(4, 4, rng).triangularView<Eigen::Upper>();
  m.diagonal() << 3.0, -1.5, 0.7, 0.2;
  const auto a = lyapunov_spectrum(TangentMap::linear(m), Vector::Zero(4), 1);
  const auto b = lyapunov_spectrum(TangentMap::linear(m), Vector::Zero(4), 16);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(a.exponents[k], b.exponents[k], 1e-14);
  EXPECT_NEAR(b.exponents[1], std::log(1.5), 1e-14);
}

TEST(LyapunovSpectrum, MatchesDefinitionalOracleOnPermutedDiagonalMaps) {
  // J_t = P diag(g'(x_t)) with a signed permutation P: the product of
  // Jacobians has orthogonal columns, so its QR and SVD factors coincide
  // already at finite T.
  std::mt19937_64 rng(61);
  for (const Index n : {Index{4}, Index{12}, Index{30}}) {
    for (int seed = 0; seed < 3; ++seed) {
      const TangentMap map = SignedPermutationMap(n, 0.3, rng);
      const Vector x0 = gaussian(n, 1, rng).col(0);
      const LyapunovSpectrum s = lyapunov_spectrum(map, x0, 16);
      const auto ref = oracle::definitional_lyapunov(JacobiansAlong(map, x0, 16));
      ASSERT_EQ(s.exponents.size(), ref.size());
      for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(s.exponents[k], ref[k], 1e-6);
    }
  }
}

TEST(LyapunovSpectrum, DenseMapSumMatchesDefinitionalOracle) {
  // For a generic map only the sum (the log-volume growth) agrees at finite
  // T; the individual finite-T estimators differ by O(1/T).
  std::mt19937_64 rng(65);
  const Index n = 30;
  const TangentMap map = TanhMap(gaussian(n, n, rng, 1.0 / std::sqrt(30.0)),
                                 gaussian(n, 1, rng).col(0), 0.3);
  const Vector x0 = gaussian(n, 1, rng).col(0);
  const LyapunovSpectrum s = lyapunov_spectrum(map, x0, 16);
  const auto ref = oracle::definitional_lyapunov(JacobiansAlong(map, x0, 16));
  double qr_sum = 0.0, ref_sum = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    qr_sum += s.exponents[k];
    ref_sum += ref[k];
  }
  EXPECT_NEAR(qr_sum, ref_sum, 1e-9);
}

TEST(LyapunovSpectrum, ContractionBound) {
  std::mt19937_64 rng(62);
  Matrix w = gaussian(6, 6, rng);
  w *= 0.8 / oracle::svd_norm(w);
  // x -> tanh(W x) is 0.8-Lipschitz.
  const TangentMap map{
      [=](const Vector& x) -> Vector { return (w * x).array().tanh().matrix(); },
      [=](const Vector& x) -> Matrix {
        return (1.0 - (w * x).array().tanh().square()).matrix().asDiagonal() * w;
      }};
  const LyapunovSpectrum s = lyapunov_spectrum(map, gaussian(6, 1, rng).col(0));
  EXPECT_LE(s.exponents.front(), std::log(0.8) + 1e-8);
}

TEST(LyapunovSpectrum, PartialBasisTracksLeadingColumns) {
  std::mt19937_64 rng(63);
  const Index n = 12, k = 3;
  const int horizon = 16;
  const TangentMap map = TanhMap(gaussian(n, n, rng, 0.3), gaussian(n, 1, rng).col(0), 0.5);
  const Vector x0 = gaussian(n, 1, rng).col(0);
  const auto full = lyapunov_spectrum(map, x0, horizon);
  const auto top = lyapunov_spectrum(map, x0, horizon, k);
  ASSERT_EQ(top.exponents.size(), static_cast<std::size_t>(k));

  // A k-column basis sees the growth of the first k columns of the product.
  Matrix phi = Matrix::Identity(n, n);
  for (const auto& j : JacobiansAlong(map, x0, horizon)) phi = j * phi;
  const Matrix lead = phi.leftCols(k);
  const double volume = std::log((lead.transpose() * lead).determinant()) / (2.0 * horizon);
  double sum = 0.0;
  for (double e : top.exponents) sum += e;
  EXPECT_NEAR(sum, volume, 1e-10);

  // Those columns are the leading columns of the full QR recursion too.
  for (double e : top.exponents) {
    double best = 1.0;
    for (double f : full.exponents) best = std::min(best, std::abs(e - f));
    EXPECT_LE(best, 1e-12);
  }
}

TEST(LyapunovSpectrum, SortedAndOnAttentionMaps) {
  Rng rng(64);
  const MSAWeights w = gaussian_msa_weights(8, 2, 4, 0.5, 0.5, rng);
  StepConfig cfg;
  cfg.norm = NormParams::unit(8);
  const LyapunovSpectrum s =
      lyapunov_spectrum(TangentMap::itrsa(w, cfg, 4), vec(random_unit_tokens(4, 8, rng)));
  ASSERT_EQ(s.exponents.size(), 32u);
  EXPECT_TRUE(std::is_sorted(s.exponents.rbegin(), s.exponents.rend()));
}

TEST(LyapunovSpectrum, CollapseAndArgumentErrors) {
  try {
    lyapunov_spectrum(TangentMap::linear(Matrix::Zero(2, 2)), Vector::Ones(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TangentCollapse);
    EXPECT_EQ(e.index().value_or(-1), 0);
    EXPECT_EQ(e.step().value_or(-1), 0);
  }
  EXPECT_THROW(lyapunov_spectrum(TangentMap::linear(Matrix::Identity(2, 2)), Vector::Ones(2), 0),
               Error);
  EXPECT_THROW(lyapunov_spectrum(TangentMap::linear(Matrix::Identity(2, 2)), Vector::Ones(2), 4, 3),
               Error);
}

TEST(MaxMeanExponents, Cases) {
  LyapunovSpectrum s;
  s.exponents = {0.1, -0.3};
  const auto mm = max_mean_exponents(s);
  EXPECT_DOUBLE_EQ(mm.max, 0.1);
  EXPECT_DOUBLE_EQ(mm.mean, -0.1);
  s.exponents = {0.0};
  EXPECT_EQ(max_mean_exponents(s).max, 0.0);
  EXPECT_EQ(max_mean_exponents(s).mean, 0.0);
  s.exponents.clear();
  EXPECT_THROW(max_mean_exponents(s), Error);
}

TEST(CriticalityReport, Bands) {
  LyapunovSpectrum s;
  s.exponents = {0.05};
  EXPECT_EQ(criticality_report(s, 0.1), Criticality::Critical);
  s.exponents = {-0.5};
  EXPECT_EQ(criticality_report(s), Criticality::Subcritical);
  s.exponents = {0.5};
  EXPECT_EQ(criticality_report(s), Criticality::Supercritical);
  EXPECT_THROW(criticality_report(s, 0.0), Error);
}

}  // namespace
}  // namespace sadyn
