#include <gtest/gtest.h>

#include "pggm/conditionals.hpp"
#include "test_support.hpp"

using pggm::GroupStructure;
using pggm::Hyperparameters;
using pggm::Sampler;
using pggm::Variant;

namespace {

pggm::Dataset small_data(std::uint64_t seed, Eigen::Index n, Eigen::Index p, Eigen::Index q) {
  pggm::Rng gen(seed);
  return testing_support::random_dataset(gen, n, p, q);
}

}  // namespace

TEST(ColumnConditional, FixedPiZeroAlwaysSlab) {
  const auto data = small_data(1, 8, 3, 1);
  const auto g = GroupStructure::singletons(3);
  Sampler s(data, g, Hyperparameters::defaults(Variant::none, 1, g));
  pggm::Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    EXPECT_EQ(s.column_conditional(t % 3).p_spike, 0.0);
    s.sweep(rng);
  }
  for (char a : s.state().active) EXPECT_TRUE(a);
}

TEST(ColumnConditional, FixedPiOneAlwaysSpike) {
  const auto data = small_data(3, 8, 3, 1);
  const auto g = GroupStructure::singletons(3);
  auto h = Hyperparameters::defaults(Variant::s, 1, g);
  h.fixed_pi = 1.0;
  Sampler s(data, g, h);
  pggm::Rng rng(4);
  for (int t = 0; t < 20; ++t) s.sweep(rng);
  EXPECT_EQ(s.state().Delta.norm(), 0.0);
  EXPECT_EQ(s.column_conditional(0).p_spike, 1.0);
}

TEST(ColumnConditional, HandComputedScalarCase) {
  // q = 1, n = 5, p = 2. With w = omega, the slab mean is
  // -s (w x_i.y + Delta_j x_j.x_i) and the spike odds come from
  // integrating the Gaussian likelihood against N(0, lambda w) by quadrature.
  const auto data = small_data(5, 5, 2, 1);
  const auto g = GroupStructure::singletons(2);
  auto h = Hyperparameters::defaults(Variant::s, 1, g);
  Sampler s(data, g, h);
  auto st = s.state();
  const double w = 1.7, lambda0 = 0.8, d1 = 0.6, pi = 0.3;
  st.Omega(0, 0) = w;
  st.Delta(0, 1) = d1;
  st.lambda(0) = lambda0;
  st.pi = pi;
  s.set_state(st);
  const auto c = s.column_conditional(0);

  const Eigen::VectorXd x0 = data.X.col(0), x1 = data.X.col(1), y = data.Y.col(0);
  const double ss = lambda0 / (1.0 + lambda0 * x0.squaredNorm());
  EXPECT_NEAR(c.s, ss, 1e-14);
  EXPECT_NEAR(c.mean(0), -ss * (w * x0.dot(y) + d1 * x1.dot(x0)), 1e-12);

  auto loglik = [&](double d0) {
    const Eigen::VectorXd r = y + (x0 * d0 + x1 * d1) / w;
    return -0.5 * w * r.squaredNorm();
  };
  const double base = loglik(0.0), var = lambda0 * w, sd = std::sqrt(var);
  const double center = c.mean(0), spread = std::sqrt(c.s * w);
  const double ratio = testing_support::simpson(
      [&](double d0) {
        return std::exp(loglik(d0) - base - 0.5 * d0 * d0 / var) / (sd * std::sqrt(2.0 * M_PI));
      },
      center - 20 * spread, center + 20 * spread, 20000);
  const double p_spike = pi / (pi + (1.0 - pi) * ratio);
  EXPECT_NEAR(c.p_spike, p_spike, 1e-10);
}

TEST(ColumnConditional, SpikeFrequencyMatchesProbability) {
  const auto data = small_data(6, 10, 2, 1);
  const auto g = GroupStructure::singletons(2);
  Sampler s(data, g, Hyperparameters::defaults(Variant::s, 1, g));
  auto st = s.state();
  st.pi = 0.5;
  st.lambda.setConstant(0.05);
  s.set_state(st);
  const double p = s.column_conditional(0).p_spike;
  ASSERT_GT(p, 0.05);
  ASSERT_LT(p, 0.95);
  pggm::Rng rng(7);
  const int n = 20000;
  int spikes = 0;
  for (int t = 0; t < n; ++t) {
    s.update_delta_column(0, rng);
    spikes += !s.state().active[0];
  }
  EXPECT_LT(std::abs(spikes / double(n) - p), 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(GroupConditional, UnitGroupsMatchColumnVariant) {
  const auto data = small_data(8, 12, 4, 2);
  const auto g = GroupStructure::singletons(4);
  Sampler s(data, g, Hyperparameters::defaults(Variant::s, 2, g));
  Sampler gs(data, g, Hyperparameters::defaults(Variant::gs, 2, g));
  pggm::Rng gen(9);
  auto st = s.state();
  st.Omega = testing_support::random_spd(gen, 2);
  st.Delta.col(1) << 0.4, -0.2;
  st.Delta.col(3) << 1.0, 0.5;
  st.lambda << 0.3, 0.9, 1.4, 0.2;
  st.pi = 0.35;
  s.set_state(st);
  gs.set_state(st);
  for (int i = 0; i < 4; ++i) {
    const auto c = s.column_conditional(i);
    const auto d = gs.group_conditional(i);
    EXPECT_NEAR(c.p_spike, d.p_spike, 1e-12);
    EXPECT_LT((c.mean - d.mean.col(0)).norm(), 1e-12);
  }
  EXPECT_THROW(s.group_conditional(0), pggm::InvalidParameter);
}

TEST(OmegaConditional, ZeroDeltaIsGamma) {
  const auto data = small_data(10, 15, 3, 1);
  const auto g = GroupStructure::singletons(3);
  const auto h = Hyperparameters::defaults(Variant::s, 1, g);
  Sampler s(data, g, h);
  const auto c = s.omega_conditional();
  EXPECT_DOUBLE_EQ(c.nu, 0.5 * (15 + h.u));
  EXPECT_EQ(c.A(0, 0), 0.0);
  const double b = data.Y.squaredNorm() + 1.0 / h.V(0, 0);
  EXPECT_NEAR(c.B(0, 0), b, 1e-12);
  pggm::Rng rng(11);
  std::vector<double> draws;
  for (int t = 0; t < 20000; ++t) {
    s.update_omega(rng);
    draws.push_back(s.state().Omega(0, 0));
  }
  const double shape = c.nu, rate = 0.5 * b;
  EXPECT_LT(testing_support::z_score(draws, shape / rate, std::sqrt(shape) / rate), 4.5);
}

TEST(LambdaConditional, InactiveColumnUsesPrior) {
  const auto data = small_data(12, 10, 3, 2);
  const auto g = GroupStructure::singletons(3);
  const auto h = Hyperparameters::defaults(Variant::s, 2, g);
  Sampler s(data, g, h);
  const auto c = s.lambda_conditional(1, s.column_quadratic_forms());
  EXPECT_FALSE(c.active);
  EXPECT_DOUBLE_EQ(c.shape, 1.5);
  EXPECT_DOUBLE_EQ(c.rate, h.ell(1));
}

TEST(LambdaConditional, ActiveColumnIsGig) {
  const auto data = small_data(13, 10, 2, 1);
  const auto g = GroupStructure::singletons(2);
  const auto h = Hyperparameters::defaults(Variant::s, 1, g);
  Sampler s(data, g, h);
  auto st = s.state();
  st.Delta(0, 0) = 1.2;
  st.Omega(0, 0) = 2.0;
  s.set_state(st);
  const auto c = s.lambda_conditional(0, s.column_quadratic_forms());
  EXPECT_TRUE(c.active);
  EXPECT_DOUBLE_EQ(c.gig.nu, 0.5);
  EXPECT_NEAR(c.gig.a, 1.44 / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(c.gig.b, 2.0 * h.ell(0));
}

TEST(PiConditional, BetaCounts) {
  const auto data = small_data(14, 20, 10, 1);
  const auto g = GroupStructure::singletons(10);
  Sampler s(data, g, Hyperparameters::defaults(Variant::s, 1, g));
  auto st = s.state();
  for (int i = 3; i < 10; ++i) st.Delta(0, i) = 0.1 * i;
  s.set_state(st);
  const auto [a, b] = s.pi_conditional();
  EXPECT_DOUBLE_EQ(a, 4.0);
  EXPECT_DOUBLE_EQ(b, 8.0);
}

TEST(PiConditional, SgsAllZeroGivesPriorForPi2) {
  const auto data = small_data(15, 20, 6, 1);
  const GroupStructure g({3, 3});
  auto h = Hyperparameters::defaults(Variant::sgs, 1, g);
  h.a2 = 2.5;
  h.b2 = 1.5;
  Sampler s(data, g, h);
  const auto [a, b] = s.pi2_conditional();
  EXPECT_DOUBLE_EQ(a, 2.5);
  EXPECT_DOUBLE_EQ(b, 1.5);
  const auto [a1, b1] = s.pi_conditional();
  EXPECT_DOUBLE_EQ(a1, 2.0 + h.a);
  EXPECT_DOUBLE_EQ(b1, h.b);
}

TEST(Identifiability, FixLambdaHoldsGroupFactors) {
  const auto data = small_data(16, 30, 6, 2);
  const GroupStructure g({3, 3});
  auto h = Hyperparameters::defaults(Variant::sgs, 2, g);
  h.identifiability = pggm::IdentifiabilityMode::fix_lambda;
  Sampler s(data, g, h);
  pggm::Rng rng(17);
  for (int t = 0; t < 30; ++t) s.sweep(rng);
  EXPECT_EQ(s.state().lambda, Eigen::VectorXd::Ones(2));
  EXPECT_NO_THROW(s.check_invariants());

  h.identifiability = pggm::IdentifiabilityMode::fix_nu;
  Sampler t(data, g, h);
  for (int k = 0; k < 30; ++k) t.sweep(rng);
  EXPECT_EQ(t.state().nu, Eigen::VectorXd::Ones(6));
}

TEST(Sampler, RejectsMismatchedState) {
  const auto data = small_data(18, 10, 3, 1);
  const auto g = GroupStructure::singletons(3);
  Sampler s(data, g, Hyperparameters::defaults(Variant::s, 1, g));
  auto st = s.state();
  st.lambda.resize(2);
  EXPECT_THROW(s.set_state(st), pggm::DimensionMismatch);
  EXPECT_THROW(Sampler(data, GroupStructure::singletons(4), Hyperparameters::defaults(Variant::s, 1, GroupStructure::singletons(4))),
               pggm::DimensionMismatch);
}
