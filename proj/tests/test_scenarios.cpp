#include <gtest/gtest.h>

#include "pggm/scenarios.hpp"
#include "test_support.hpp"

TEST(Ar1, SmallMatrix) {
  const Eigen::MatrixXd c = pggm::ar1_matrix(3, 0.5);
  Eigen::MatrixXd expected(3, 3);
  expected << 1.0, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 1.0;
  EXPECT_EQ((c - expected).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(pggm::ar1_matrix(3, 1.0), pggm::InvalidParameter);
}

TEST(Ar1, InverseIsTridiagonal) {
  const Eigen::MatrixXd inv = pggm::ar1_matrix(10, 0.5).inverse();
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      if (std::abs(i - j) > 1) {
        EXPECT_NEAR(inv(i, j), 0.0, 1e-12);
      }
  EXPECT_NEAR(inv(0, 1), -0.5 / 0.75, 1e-12);
}

TEST(ScenarioParse, Names) {
  EXPECT_EQ(pggm::parse_scenario("3").id, 3);
  const auto r = pggm::parse_scenario("6r");
  EXPECT_TRUE(r.reduced);
  EXPECT_EQ(r.name(), "6r");
  EXPECT_THROW(pggm::parse_scenario("2r"), pggm::InvalidParameter);
  EXPECT_THROW(pggm::parse_scenario("7"), pggm::InvalidParameter);
  EXPECT_THROW(pggm::parse_scenario(""), pggm::InvalidParameter);
}

TEST(Scenario, ZeroIsDense) {
  pggm::Rng gen(1);
  pggm::ScenarioSpec spec;
  spec.id = 0;
  const auto sd = pggm::generate(spec, gen);
  EXPECT_EQ(sd.truth.Delta.cols(), 5);
  for (char s : sd.truth.support) EXPECT_TRUE(s);
  EXPECT_EQ(sd.hyper.variant, pggm::Variant::none);
  EXPECT_EQ(sd.train.n(), 400);
  EXPECT_EQ(sd.test.n(), 100);
}

TEST(Scenario, OneHasTenActive) {
  pggm::Rng gen(2);
  pggm::ScenarioSpec spec;
  const auto sd = pggm::generate(spec, gen);
  int active = 0;
  for (char s : sd.truth.support) active += s;
  EXPECT_EQ(active, 10);
  EXPECT_EQ(sd.truth.Delta.cols(), 50);
  EXPECT_DOUBLE_EQ(sd.hyper.a, 25.0);
  EXPECT_LT((sd.truth.Omega * sd.truth.B.transpose() + sd.truth.Delta).norm(), 1e-12);
}

TEST(Scenario, GroupLayouts) {
  pggm::Rng gen(3);
  pggm::ScenarioSpec spec;
  spec.id = 3;
  auto sd = pggm::generate(spec, gen);
  EXPECT_EQ(sd.groups.m(), 5);
  EXPECT_EQ(sd.truth.active_groups, (std::vector<int>{1, 3}));
  int active = 0;
  for (char s : sd.truth.support) active += s;
  EXPECT_EQ(active, 20);

  spec = pggm::parse_scenario("6r");
  spec.n_e = 60;
  sd = pggm::generate(spec, gen);
  EXPECT_EQ(sd.truth.Omega.rows(), 5);
  EXPECT_EQ(sd.groups.m(), 4);
  EXPECT_EQ(sd.hyper.variant, pggm::Variant::sgs);
  active = 0;
  for (char s : sd.truth.support) active += s;
  EXPECT_EQ(active, 25);
}

TEST(Scenario, NoiseCovarianceMatchesOmegaInverse) {
  // Scenario 2 (q = 2) with many rows: residual covariance approaches Omega^{-1}.
  pggm::Rng gen(4);
  pggm::ScenarioSpec spec;
  spec.id = 2;
  spec.n_e = 100000;
  spec.n_v = 1;
  const auto sd = pggm::generate(spec, gen);
  const Eigen::MatrixXd e = sd.train.Y - sd.train.X * sd.truth.B;
  const Eigen::MatrixXd cov = e.transpose() * e / static_cast<double>(e.rows());
  const Eigen::MatrixXd target = sd.truth.Omega.inverse();
  // Entry standard error is at most sqrt(2 / n) * max variance.
  EXPECT_LT((cov - target).cwiseAbs().maxCoeff(), 5.0 * std::sqrt(2.0 / 1e5) * target.maxCoeff());
  EXPECT_NEAR(sd.noise_floor(), target.trace() / 2.0, 1e-12);
}

TEST(Scenario, DeterministicGivenSeed) {
  pggm::ScenarioSpec spec;
  spec.id = 5;
  pggm::Rng a(9), b(9);
  const auto x = pggm::generate(spec, a), y = pggm::generate(spec, b);
  EXPECT_EQ(x.train.Y, y.train.Y);
  EXPECT_EQ(x.truth.Delta, y.truth.Delta);
}

TEST(Scenario, CorrelatedPredictors) {
  pggm::Rng gen(5);
  pggm::ScenarioSpec spec;
  spec.n_e = 20000;
  spec.rho_x = 0.6;
  const auto sd = pggm::generate(spec, gen);
  const Eigen::MatrixXd& x = sd.train.X;
  const double corr = x.col(0).dot(x.col(1)) / std::sqrt(x.col(0).squaredNorm() * x.col(1).squaredNorm());
  EXPECT_NEAR(corr, 0.6, 0.03);
}
