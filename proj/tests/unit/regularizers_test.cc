#include "sadyn/regularizers.hpp"

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sadyn/init.hpp"

namespace sadyn {
namespace {

using oracle::gaussian;

MSAWeights SingleHead(const Matrix& wv, const Matrix& wo) {
  MSAWeights w;
  const Index d = wv.rows();
  w.heads.push_back(HeadWeights{Matrix::Identity(d, wv.cols()), Matrix::Identity(d, wv.cols()), wv});
  w.wo = wo;
  return w;
}

double AntisymmetricOracle(const Matrix& m) {
  double s = 0.0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) s += (m(i, j) - m(j, i)) * (m(i, j) - m(j, i));
  return s;
}

TEST(REMulti, HandCases) {
  const Matrix n = (Matrix(2, 2) << 0, 1, 0, 0).finished();
  EXPECT_EQ(r_e_multi(SingleHead(n, Matrix::Identity(2, 2))), 2.0);
  EXPECT_EQ(r_e_multi(SingleHead(Matrix::Identity(2, 2), Matrix::Identity(2, 2))), 0.0);
}

TEST(REMulti, MatchesOracleAndIgnoresSymmetricPart) {
  std::mt19937_64 rng(70);
  MSAWeights w;
  for (int h = 0; h < 3; ++h)
    w.heads.push_back(HeadWeights{gaussian(6, 2, rng), gaussian(6, 2, rng), gaussian(6, 2, rng)});
  w.wo = gaussian(6, 6, rng);
  const Matrix prod = w.concat_value() * w.wo;
  EXPECT_NEAR(r_e_multi(w), AntisymmetricOracle(prod), 1e-12);

  // Shift the product by a symmetric matrix through W^O (W^V is invertible).
  const Matrix g = gaussian(6, 6, rng);
  MSAWeights shifted = w;
  shifted.wo = w.wo + w.concat_value().inverse() * (g + g.transpose());
  EXPECT_NEAR(r_e_multi(shifted), r_e_multi(w), 1e-9 * r_e_multi(w));
  EXPECT_GE(r_e_multi(w), 0.0);
}

TEST(RESingle, HeadCount) {
  std::mt19937_64 rng(71);
  const MSAWeights one = SingleHead(gaussian(3, 3, rng), gaussian(3, 3, rng));
  EXPECT_EQ(r_e_single(one), r_e_multi(one));
  const Matrix v = gaussian(3, 3, rng);
  EXPECT_EQ(r_e_single(SingleHead(v + v.transpose(), Matrix::Identity(3, 3))), 0.0);

  MSAWeights two;
  for (int h = 0; h < 2; ++h)
    two.heads.push_back(HeadWeights{gaussian(4, 2, rng), gaussian(4, 2, rng), gaussian(4, 2, rng)});
  two.wo = gaussian(4, 4, rng);
  try {
    r_e_single(two);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HeadCountError);
  }
}

TEST(RegularizerFdGradient, MatchesClosedFormForREMulti) {
  // With K = M - M^T and M = W^V W^O: dR/dW^V = 4 K W^O^T, dR/dW^O = 4 W^V^T K.
  std::mt19937_64 rng(74);
  MSAWeights w;
  for (int h = 0; h < 2; ++h)
    w.heads.push_back(HeadWeights{gaussian(6, 3, rng), gaussian(6, 3, rng), gaussian(6, 3, rng)});
  w.wo = gaussian(6, 6, rng);
  const auto grads = regularizer_fd_gradient(w, [](const MSAWeights& m) { return r_e_multi(m); });
  const Matrix wv = w.concat_value();
  const Matrix k = wv * w.wo - (wv * w.wo).transpose();
  const Matrix gv = 4.0 * k * w.wo.transpose();
  EXPECT_LE(oracle::max_rel_error(grads.at("wv[0]"), gv.leftCols(3)), 1e-6);
  EXPECT_LE(oracle::max_rel_error(grads.at("wv[1]"), gv.rightCols(3)), 1e-6);
  EXPECT_LE(oracle::max_rel_error(grads.at("wo"), 4.0 * wv.transpose() * k), 1e-6);
  EXPECT_EQ(grads.at("wq[1]").norm(), 0.0);
  EXPECT_EQ(grads.size(), 7u);
}

TEST(RSpec, HandCases) {
  EXPECT_NEAR(r_spec({2.0 * Matrix::Identity(3, 3)}, {}), 9.0, 1e-12);
  EXPECT_NEAR(r_spec(std::vector<Matrix>{}, {Eigen::Vector2d(1.0, 1.0)}), 4.0, 1e-15);
  EXPECT_NEAR(r_spec({Matrix::Identity(2, 2)}, {Vector::Zero(2)}), 0.0, 1e-15);
}

TEST(RSpec, VanishesOnlyForUnitSigmasAndZeroBiases) {
  RunConfig cfg;
  cfg.dims = Dims{4, 8, 2, 4, 4};
  cfg.init.mode = InitMode::Orthogonal;
  cfg.seed = 3;
  MSAWeights w = init_weights(cfg).weights;
  EXPECT_LE(r_spec(w), 1e-12);
  EXPECT_GT(r_spec(w, {Vector::Constant(2, 0.1)}), 0.0);
  w.heads[1].wk *= 1.01;
  EXPECT_GT(r_spec(w), 1e-4);
}

TEST(RegularizerReport, PopulatesEverything) {
  std::mt19937_64 rng(72);
  const MSAWeights one = SingleHead(gaussian(3, 3, rng), gaussian(3, 3, rng));
  const RegularizerReport r = regularizer_report(one, {Vector::Ones(2)});
  ASSERT_TRUE(r.r_e_single.has_value());
  EXPECT_EQ(*r.r_e_single, r.r_e_multi);
  EXPECT_EQ(r.per_matrix_sigmas.size(), 4u);
  EXPECT_NEAR(r.per_matrix_sigmas.at("wo"), oracle::svd_norm(one.wo), 1e-9);
  EXPECT_NEAR(r.r_spec, r_spec(one, {Vector::Ones(2)}), 1e-12);
  EXPECT_GT(r.orthogonality_deviation, 0.0);
}

}  // namespace
}  // namespace sadyn
