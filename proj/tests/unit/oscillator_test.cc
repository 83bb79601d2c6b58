#include "sadyn/oscillator.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sadyn/init.hpp"

namespace sadyn {
namespace {

Vector RandomUnit(Index d, std::mt19937_64& rng) {
  return oracle::gaussian(d, 1, rng).col(0).normalized();
}

TEST(RotationGenerator, Blocks) {
  const Matrix m = rotation_generator({2.0, 3.0});
  EXPECT_EQ(m(0, 1), 2.0);
  EXPECT_EQ(m(1, 0), -2.0);
  EXPECT_EQ(m(2, 3), 3.0);
  EXPECT_EQ(m(0, 2), 0.0);
  EXPECT_EQ((m + m.transpose()).norm(), 0.0);
}

TEST(IsDegenerate, DetectsEqualFrequencies) {
  EXPECT_TRUE(is_degenerate(rotation_generator({1.5, -1.5, 1.5})));
  EXPECT_FALSE(is_degenerate(rotation_generator({1.0, 2.0})));
  EXPECT_TRUE(is_degenerate(Matrix::Zero(4, 4)));
  EXPECT_TRUE(is_degenerate(rotation_generator({1.0, 1.0 + 1e-12})));
}

TEST(OscStep, PlainAndNormalized) {
  const double w = 0.8, eta = 1.3;
  OscSystem plain{rotation_generator({w}), eta, OscVariant::DiscretePlain};
  const Vector e1 = Eigen::Vector2d(1.0, 0.0);
  const Vector y = osc_step(plain, e1);
  EXPECT_NEAR(y(0), 1.0, 1e-15);
  EXPECT_NEAR(y(1), -eta * w, 1e-15);
  EXPECT_NEAR(y.squaredNorm(), 1.0 + eta * eta * w * w, 1e-14);

  OscSystem norm = plain;
  norm.variant = OscVariant::DiscreteNormalized;
  EXPECT_NEAR(osc_step(norm, e1).norm(), 1.0, 1e-15);

  OscSystem cont = plain;
  cont.variant = OscVariant::Continuous;
  EXPECT_TRUE(osc_step(cont, e1).isApprox(plain.omega * e1));
}

TEST(OscStep, NormIdentityAndSphereInvariance) {
  std::mt19937_64 rng(90);
  Rng r2(90);
  const OmegaBank bank = random_omega_bank(6, 6, 1.0, r2);
  OscSystem sys{bank.omegas[0], 0.7, OscVariant::DiscretePlain};
  for (int t = 0; t < 20; ++t) {
    const Vector x = oracle::gaussian(6, 1, rng).col(0);
    EXPECT_NEAR(osc_step(sys, x).squaredNorm(),
                x.squaredNorm() + 0.49 * (sys.omega * x).squaredNorm(), 1e-12);
  }
  sys.variant = OscVariant::DiscreteNormalized;
  Vector x = RandomUnit(6, rng);
  for (int t = 0; t < 200; ++t) {
    x = osc_step(sys, x);
    ASSERT_NEAR(x.norm(), 1.0, 1e-12);
  }
}

TEST(OscStep, Preconditions) {
  OscSystem sys{rotation_generator({1.0}), 1.0, OscVariant::DiscreteNormalized};
  EXPECT_THROW(osc_step(sys, Eigen::Vector2d(2.0, 0.0)), Error);
  sys.omega(0, 0) = 1.0;
  EXPECT_THROW(sys.validate(), Error);
  OscSystem neg{rotation_generator({1.0}), -1.0, OscVariant::DiscretePlain};
  EXPECT_THROW(neg.validate(), Error);
}

TEST(OscJacobian, ClosedFormsAndFd) {
  std::mt19937_64 rng(91);
  const Matrix om = rotation_generator({0.6, 1.7});
  const Vector x = RandomUnit(4, rng);
  OscSystem sys{om, 0.9, OscVariant::Continuous};
  EXPECT_EQ(osc_jacobian(sys, x).data, om);
  sys.variant = OscVariant::DiscretePlain;
  EXPECT_TRUE(osc_jacobian(sys, x).data.isApprox(Matrix::Identity(4, 4) + 0.9 * om));

  sys.variant = OscVariant::DiscreteNormalized;
  const auto f = [&](const TokenMatrix& z) -> TokenMatrix {
    return osc_apply(sys, z.col(0));
  };
  const Matrix fd = fd_jacobian(f, x).data;
  EXPECT_LE(oracle::max_rel_error(osc_jacobian(sys, x).data, fd), 1e-6);
}

TEST(OscEigenCheck, PaperCases) {
  OscSystem plain{rotation_generator({1.0}), 1.0, OscVariant::DiscretePlain};
  const Vector e1 = Eigen::Vector2d(1.0, 0.0);
  const OscEigenCheck p = osc_eigen_check(plain, e1);
  for (const auto& l : p.spectrum.eigenvalues) {
    EXPECT_NEAR(l.real(), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(l.imag()), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(l), std::sqrt(2.0), 1e-12);
  }
  EXPECT_EQ(p.verdict, std::optional<bool>(true));

  OscSystem norm = plain;
  norm.variant = OscVariant::DiscreteNormalized;
  std::mt19937_64 rng(92);
  for (int t = 0; t < 50; ++t) {
    const OscEigenCheck c = osc_eigen_check(norm, RandomUnit(2, rng));
    EXPECT_TRUE(c.degenerate);
    EXPECT_EQ(c.verdict, std::optional<bool>(true));
  }

  OscSystem cont{rotation_generator({2.0, 0.5}), 1.0, OscVariant::Continuous};
  EXPECT_EQ(osc_eigen_check(cont, RandomUnit(4, rng)).verdict, std::optional<bool>(true));
}

TEST(OscEigenCheck, ZeroGeneratorIsProjector) {
  OscSystem sys{Matrix::Zero(3, 3), 1.0, OscVariant::DiscreteNormalized};
  std::mt19937_64 rng(93);
  const Vector x = RandomUnit(3, rng);
  EXPECT_TRUE(osc_jacobian(sys, x).data.isApprox(Matrix::Identity(3, 3) - x * x.transpose(), 1e-14));
  const OscEigenCheck c = osc_eigen_check(sys, x);
  EXPECT_NEAR(c.min_abs_eig, 0.0, 1e-14);
  EXPECT_NEAR(c.spectrum.max_abs_eig, 1.0, 1e-14);
}

TEST(OscEigenCheck, NonDegenerateIsMeasuredNotAsserted) {
  OscSystem sys{rotation_generator({0.2, 3.0}), 1.0, OscVariant::DiscreteNormalized};
  std::mt19937_64 rng(94);
  const OscEigenCheck c = osc_eigen_check(sys, RandomUnit(4, rng));
  EXPECT_FALSE(c.degenerate);
  EXPECT_FALSE(c.verdict.has_value());
  EXPECT_GT(c.spectrum.spectral_norm, 0.0);
}

TEST(PhaseScan, GridVerdicts) {
  std::vector<double> etas, omegas;
  for (int k = 0; k < 8; ++k) {
    etas.push_back(0.1 * (k + 1));
    omegas.push_back(0.25 * (k + 1));
  }
  const auto plain = phase_scan(etas, omegas, OscVariant::DiscretePlain, 4);
  ASSERT_EQ(plain.size(), 64u);
  for (const auto& c : plain) EXPECT_GE(c.max_abs_eig, 1.0);
  EXPECT_EQ(plain[9].eta, etas[1]);
  EXPECT_EQ(plain[9].omega, omegas[1]);

  for (const auto& c : phase_scan(etas, omegas, OscVariant::DiscreteNormalized, 4)) {
    EXPECT_TRUE(c.degenerate);
    EXPECT_LE(c.spectral_norm, 1.0 + 1e-10);
    EXPECT_LE(c.max_abs_eig, 1.0 + 1e-10);
  }

  const auto tiny_p = phase_scan({1e-9}, {1.0}, OscVariant::DiscretePlain);
  const auto tiny_n = phase_scan({1e-9}, {1.0}, OscVariant::DiscreteNormalized);
  EXPECT_NEAR(tiny_p[0].max_abs_eig, 1.0, 1e-12);
  EXPECT_NEAR(tiny_n[0].max_abs_eig, 1.0, 1e-8);
  EXPECT_THROW(phase_scan({0.0}, {1.0}, OscVariant::DiscretePlain), Error);
}

}  // namespace
}  // namespace sadyn
