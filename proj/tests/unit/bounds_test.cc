#include "sadyn/bounds.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sadyn/init.hpp"
#include "sadyn/jacobian.hpp"

namespace sadyn {
namespace {

TEST(Prop3Bound, Arithmetic) {
  EXPECT_DOUBLE_EQ(prop3_bound(1.0, 1.0, 0.0, 123.0), 1.0);
  EXPECT_DOUBLE_EQ(prop3_bound(2.0, 4.0, 1.0, 3.0), 2.0);
  StepConfig cfg;
  cfg.eta = 1.0;
  cfg.norm = NormParams::unit(2);
  cfg.norm.gamma << -2.0, 0.5;
  EXPECT_DOUBLE_EQ(prop3_bound(cfg, 4.0, 3.0), 2.0);
  EXPECT_THROW(prop3_bound(1.0, 0.0, 1.0, 1.0), Error);
}

TEST(CastinBound, HandEvaluation) {
  MSAWeights w;
  w.heads.push_back(HeadWeights{(Matrix(1, 1) << 1.0).finished(), (Matrix(1, 1) << 1.0).finished(),
                                (Matrix(1, 1) << 1.0).finished()});
  w.wo = Matrix::Identity(1, 1);
  w.beta = 1.0;
  EXPECT_NEAR(castin_bound(w, 1.0, 2), std::sqrt(15.0), 1e-12);
  w.heads[0].wv.setZero();
  EXPECT_EQ(castin_bound(w, 1.0, 2), 0.0);
}

TEST(CastinBound, StrictlyIncreasingInTokensAndRadius) {
  Rng rng(80);
  const MSAWeights w = gaussian_msa_weights(6, 2, 3, 0.4, 0.5, rng);
  double prev = 0.0;
  for (Index s : {1, 2, 4, 8, 16}) {
    const double b = castin_bound(w, 1.0, s);
    EXPECT_GT(b, prev);
    prev = b;
  }
  prev = 0.0;
  for (double r : {0.5, 1.0, 2.0, 4.0}) {
    const double b = castin_bound(w, r, 4);
    EXPECT_GT(b, prev);
    prev = b;
  }
}

TEST(CheckBound, SlackAndVerdict) {
  const BoundCheck ok = check_bound(1.0, 2.0);
  EXPECT_TRUE(ok.satisfied);
  EXPECT_EQ(ok.slack, 1.0);
  EXPECT_FALSE(check_bound(2.0, 1.0).satisfied);
  EXPECT_TRUE(check_bound(1.0 + 5e-9, 1.0).satisfied);
  EXPECT_THROW(check_bound(std::nan(""), 1.0), Error);
}

TEST(MeasureProp3, BoundsHoldOnRandomInstances) {
  Rng rng(81);
  for (int seed = 0; seed < 20; ++seed) {
    const MSAWeights w = gaussian_msa_weights(8, 2, 4, 0.5, 0.5, rng);
    StepConfig cfg;
    cfg.eta = 0.5 * (seed % 4 + 1);
    cfg.norm = NormParams{gaussian_matrix(8, 1, 1.0, rng).col(0), kDefaultEpsFloor};
    const TokenMatrix x = random_unit_tokens(5, 8, rng);
    const Prop3Measurement m = measure_prop3(x, w, cfg);
    EXPECT_TRUE(check_bound(m.step_norm, m.bound_measured).satisfied);
    EXPECT_TRUE(check_bound(m.step_norm, m.bound_castin).satisfied);
    EXPECT_TRUE(check_bound(m.jmsa_norm, castin_bound(w, m.r, 5)).satisfied);
    EXPECT_NEAR(m.jmsa_norm, oracle::svd_norm(jac_msa(x, w).data), 1e-8 * m.jmsa_norm);
  }
}

TEST(EtaLimitProbe, ZeroEtaIsNormalizationJacobian) {
  Rng rng(82);
  const MSAWeights w = gaussian_msa_weights(6, 2, 3, 0.5, 0.5, rng);
  StepConfig cfg;
  cfg.norm = NormParams::unit(6);
  const TokenMatrix x = random_tokens(4, 6, 2.0, rng);
  const EtaProbe p = eta_limit_probe(x, w, cfg, {0.0, 1.0});
  EXPECT_NEAR(p.rows[0].step_norm, oracle::svd_norm(jac_rmsnorm(x, cfg.norm).data), 1e-9);
  EXPECT_EQ(p.sup_step_norm, std::max(p.rows[0].step_norm, p.rows[1].step_norm));
}

TEST(EtaLimitProbe, LinearSurrogatePlateaus) {
  Rng rng(83);
  MSAWeights w = gaussian_msa_weights(6, 2, 3, 0.5, 0.5, rng);
  for (auto& h : w.heads) {
    h.wq.setZero();
    h.wk.setZero();
  }
  StepConfig cfg;
  cfg.norm = NormParams::unit(6);
  const TokenMatrix x = random_unit_tokens(4, 6, rng);
  std::vector<double> grid;
  for (int k = 0; k <= 12; ++k) grid.push_back(std::pow(10.0, -1.0 + 0.25 * k));
  const EtaProbe p = eta_limit_probe(x, w, cfg, grid);
  double lo = 1e300, hi = 0.0;
  for (std::size_t k = grid.size() - 5; k < grid.size(); ++k) {
    lo = std::min(lo, p.rows[k].step_norm);
    hi = std::max(hi, p.rows[k].step_norm);
  }
  const double ratio = p.rows.back().step_norm / hi;
  EXPECT_GE(ratio, 0.5);
  EXPECT_LE(ratio, 1.5);
  EXPECT_GE(lo / hi, 0.5);
}

TEST(EtaLimitProbe, VanishingUpdateIsDegenerate) {
  Rng rng(84);
  MSAWeights w = gaussian_msa_weights(4, 1, 4, 0.5, 0.5, rng);
  w.wo.setZero();
  StepConfig cfg;
  cfg.norm = NormParams::unit(4);
  try {
    eta_limit_probe(random_unit_tokens(3, 4, rng), w, cfg, {1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateRow);
  }
}

TEST(TokenSweep, RowsAreConsistent) {
  TokenSweepConfig cfg;
  cfg.token_counts = {4, 8};
  cfg.samples = 2;
  cfg.token_norm = 2.0;
  const auto rows = token_sweep(cfg);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_LE(r.step_norm, r.prop3_bound * (1.0 + 1e-9));
    EXPECT_LE(r.msa_norm, r.castin_bound);
  }
  EXPECT_GT(rows[1].castin_bound, rows[0].castin_bound);
  const auto again = token_sweep(cfg);
  EXPECT_EQ(again[1].step_norm, rows[1].step_norm);
}

}  // namespace
}  // namespace sadyn
