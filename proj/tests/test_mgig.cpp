#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "pggm/mgig.hpp"
#include "test_support.hpp"

using pggm::MgigParams;
using pggm::Rng;

namespace {

MgigParams scalar(double nu, double a, double b) {
  return {nu, Eigen::MatrixXd::Constant(1, 1, a), Eigen::MatrixXd::Constant(1, 1, b)};
}

bool is_spd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0.0;
}

}  // namespace

TEST(Riccati, ScalarZeroCoefficient) {
  // d = 1, nu = 1: coefficient 0, M^2 = 1.
  EXPECT_NEAR(pggm::mgig_mode(scalar(1.0, 1.0, 1.0)).mode(0, 0), 1.0, 1e-14);
}

TEST(Riccati, IdentityCase) {
  MgigParams p{1.5, Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)};
  EXPECT_LT((pggm::mgig_mode(p).mode - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-13);
}

TEST(Riccati, ScalarQuadraticExample) {
  // 2 M^2 - 2 M - 3 = 0.
  const double m = pggm::mgig_mode(scalar(2.0, 3.0, 2.0)).mode(0, 0);
  EXPECT_NEAR(m, (2.0 + std::sqrt(28.0)) / 4.0, 1e-12);
  EXPECT_NEAR(m, 1.8228756555322954, 1e-12);
}

TEST(Riccati, ScalarMatchesClosedFormGigMode) {
  Rng gen(17);
  for (int k = 0; k < 200; ++k) {
    const double nu = -5.0 + 10.0 * gen.uniform();
    const double a = std::exp(-4.0 + 8.0 * gen.uniform()), b = std::exp(-4.0 + 8.0 * gen.uniform());
    // Cancellation-free root of b x^2 - 2 (nu - 1) x - a = 0.
    const double h = nu - 1.0, disc = std::sqrt(h * h + a * b);
    const double closed = h >= 0.0 ? (h + disc) / b : a / (disc - h);
    EXPECT_NEAR(pggm::mgig_mode(scalar(nu, a, b)).mode(0, 0) / closed, 1.0, 1e-12);
  }
}

TEST(Riccati, ResidualOnRandomSpdPairs) {
  Rng gen(23);
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(gen.uniform_index(5));
    MgigParams p{-4.0 + 12.0 * gen.uniform(), testing_support::random_spd(gen, d),
                 testing_support::random_spd(gen, d)};
    const auto s = pggm::mgig_mode(p);
    EXPECT_LE(pggm::riccati_residual_norm(p, s.mode) / p.A.norm(), 1e-10);
    EXPECT_TRUE(s.mode.isApprox(s.mode.transpose(), 1e-14));
    EXPECT_TRUE(is_spd(s.mode));
  }
}

TEST(Riccati, CommutingCaseMatchesEigenOracle) {
  Rng gen(29);
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(gen.uniform_index(4));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(testing_support::random_spd(gen, d));
    const Eigen::MatrixXd q = es.eigenvectors();
    Eigen::VectorXd a(d), b(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      a(i) = 0.05 + 4.0 * gen.uniform();
      b(i) = 0.05 + 4.0 * gen.uniform();
    }
    MgigParams p;
    p.nu = -3.0 + 9.0 * gen.uniform();
    p.A = q * a.asDiagonal() * q.transpose();
    p.B = q * b.asDiagonal() * q.transpose();
    p.A = (0.5 * (p.A + p.A.transpose())).eval();
    p.B = (0.5 * (p.B + p.B.transpose())).eval();
    const double c = d + 1.0 - 2.0 * p.nu;
    Eigen::VectorXd m(d);
    for (Eigen::Index i = 0; i < d; ++i) m(i) = (-c + std::sqrt(c * c + 4.0 * a(i) * b(i))) / (2.0 * b(i));
    const Eigen::MatrixXd oracle = q * m.asDiagonal() * q.transpose();
    EXPECT_LT((pggm::mgig_mode(p).mode - oracle).norm() / oracle.norm(), 1e-10);
  }
}

TEST(Riccati, WarmStartGivesSameRoot) {
  Rng gen(31);
  for (int k = 0; k < 30; ++k) {
    MgigParams p{gen.uniform() * 6.0, testing_support::random_spd(gen, 3), testing_support::random_spd(gen, 3)};
    const auto cold = pggm::mgig_mode(p);
    const Eigen::MatrixXd start = cold.mode * (0.5 + gen.uniform());
    const auto warm = pggm::mgig_mode(p, {}, &start);
    EXPECT_LT((warm.mode - cold.mode).norm() / cold.mode.norm(), 1e-10);
    // Warm start from the solution itself needs at most the polishing step.
    const auto again = pggm::mgig_mode(p, {}, &cold.mode);
    EXPECT_LE(again.iterations, 1);
  }
}

TEST(Riccati, SingularAWithNegativeCoefficient) {
  // A of rank 1 (one active column), c = d + 1 - 2 nu < 0: SPD root exists.
  Eigen::VectorXd v(3);
  v << 1.0, -0.5, 2.0;
  MgigParams p{20.0, v * v.transpose(), Eigen::MatrixXd::Identity(3, 3) * 0.7};
  const auto s = pggm::mgig_mode(p);
  EXPECT_TRUE(is_spd(s.mode));
  EXPECT_LE(s.relative_residual, 1e-10);
  // A = 0: M = -c B^{-1}.
  MgigParams z{20.0, Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Identity(3, 3) * 0.7};
  const double c = z.linear_coefficient();
  EXPECT_LT((pggm::mgig_mode(z).mode - (-c / 0.7) * Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-10);
}

TEST(Riccati, NearlySingularANeverReturnsNonSpd) {
  Rng gen(37);
  for (int k = 0; k < 20; ++k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(testing_support::random_spd(gen, 4));
    Eigen::VectorXd ev(4);
    ev << 1.0, 1e-3, 1e-6, 1e-8;  // condition number 1e8
    MgigParams p;
    p.A = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    p.A = (0.5 * (p.A + p.A.transpose())).eval();
    p.B = testing_support::random_spd(gen, 4);
    p.nu = 0.5 + 4.0 * gen.uniform();
    try {
      const auto s = pggm::mgig_mode(p);
      EXPECT_TRUE(is_spd(s.mode));
      // Cross-check against a dense solve: the residual of the whitened equation.
      EXPECT_LE(pggm::riccati_residual_norm(p, s.mode) / p.A.norm(), 1e-9);
    } catch (const pggm::NumericalError&) {
      SUCCEED();  // reporting failure is acceptable, returning garbage is not
    }
  }
}

TEST(Riccati, ModeMaximizesDensity) {
  Rng gen(41);
  for (int k = 0; k < 20; ++k) {
    MgigParams p{1.0 + 5.0 * gen.uniform(), testing_support::random_spd(gen, 3), testing_support::random_spd(gen, 3)};
    const Eigen::MatrixXd m = pggm::mgig_mode(p).mode;
    const double at_mode = pggm::logpdf_mgig(m, p);
    for (int j = 0; j < 10; ++j) {
      Eigen::MatrixXd e = testing_support::random_matrix(gen, 3, 3);
      e = (1e-3 * (e + e.transpose())).eval();
      EXPECT_LT(pggm::logpdf_mgig(m + e, p), at_mode + 1e-12);
    }
  }
}

TEST(Riccati, InvalidInputs) {
  EXPECT_THROW(pggm::mgig_mode({1.0, Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3)}),
               pggm::DimensionMismatch);
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(pggm::mgig_mode({1.0, Eigen::MatrixXd::Identity(2, 2), bad}), pggm::InvalidParameter);
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(pggm::mgig_mode({1.0, asym, Eigen::MatrixXd::Identity(2, 2)}), pggm::InvalidParameter);
  EXPECT_THROW(pggm::mgig_mode(scalar(1.0, 1.0, 1.0), {0.0, 10}), pggm::InvalidParameter);
}

TEST(Mgig, ScalarDrawIsGigDraw) {
  Rng gen(43);
  for (int k = 0; k < 50; ++k) {
    const double nu = -3.0 + 6.0 * gen.uniform(), a = 0.1 + 3.0 * gen.uniform(), b = 0.1 + 3.0 * gen.uniform();
    Rng r1(k), r2(k);
    EXPECT_EQ(pggm::mgig_draw_or_mode(r1, scalar(nu, a, b))(0, 0), pggm::sample_gig(r2, {nu, a, b}));
  }
  // a = 0: Gamma(nu, b/2) limit.
  Rng r1(5), r2(5);
  EXPECT_EQ(pggm::mgig_draw_or_mode(r1, scalar(3.0, 0.0, 2.0))(0, 0), pggm::sample_gamma(r2, 3.0, 1.0));
}

TEST(Mgig, MatrixPathIsSeedIndependentMode) {
  Rng gen(47);
  MgigParams p{3.0, testing_support::random_spd(gen, 2), testing_support::random_spd(gen, 2)};
  Rng r1(1), r2(999);
  const Eigen::MatrixXd x1 = pggm::mgig_draw_or_mode(r1, p), x2 = pggm::mgig_draw_or_mode(r2, p);
  EXPECT_EQ((x1 - x2).norm(), 0.0);
  EXPECT_EQ((x1 - pggm::mgig_mode(p).mode).norm(), 0.0);
}

TEST(Mgig, LogDensityReducesToGig) {
  for (double x : {0.3, 1.0, 2.5}) {
    const double m = pggm::logpdf_mgig(Eigen::MatrixXd::Constant(1, 1, x), scalar(1.7, 0.4, 2.2));
    EXPECT_NEAR(m, pggm::logpdf_gig(x, {1.7, 0.4, 2.2}), 1e-13);
  }
}
