#include <gtest/gtest.h>

#include <algorithm>

#include "pggm/evaluation.hpp"
#include "test_support.hpp"

namespace {

std::vector<char> mask(std::initializer_list<int> bits) { return std::vector<char>(bits.begin(), bits.end()); }

pggm::ChainOutput chain_of(const std::vector<Eigen::MatrixXd>& deltas, const Eigen::MatrixXd& omega) {
  pggm::ChainOutput c;
  c.q = deltas.front().rows();
  c.p = deltas.front().cols();
  c.groups = pggm::GroupStructure::singletons(static_cast<int>(c.p));
  for (const auto& d : deltas) {
    std::vector<char> active(static_cast<std::size_t>(c.p));
    for (Eigen::Index i = 0; i < c.p; ++i) active[static_cast<std::size_t>(i)] = !(d.col(i).array() == 0.0).all();
    c.delta.push_back(pggm::SparseDeltaDraw::from_dense(d, active));
    c.omega.push_back(omega);
  }
  return c;
}

}  // namespace

TEST(FScore, PerfectRecovery) {
  const auto f = pggm::f_score(mask({1, 0, 1, 0}), mask({1, 0, 1, 0}));
  EXPECT_DOUBLE_EQ(f.f, 1.0);
  EXPECT_EQ(f.tp, 2);
}

TEST(FScore, HalfRecall) {
  const auto f = pggm::f_score(mask({1, 0, 0}), mask({1, 1, 0}));
  EXPECT_DOUBLE_EQ(f.precision, 1.0);
  EXPECT_DOUBLE_EQ(f.recall, 0.5);
  EXPECT_NEAR(f.f, 2.0 / 3.0, 1e-15);
}

TEST(FScore, NineOfTen) {
  std::vector<char> truth(20, 0), est(20, 0);
  for (int i = 0; i < 10; ++i) truth[static_cast<std::size_t>(i)] = 1;
  for (int i = 0; i < 9; ++i) est[static_cast<std::size_t>(i)] = 1;
  EXPECT_NEAR(pggm::f_score(est, truth).f, 1.8 / 1.9, 1e-15);
}

TEST(FScore, DegenerateAndMismatch) {
  const auto f = pggm::f_score(mask({0, 0}), mask({1, 0}));
  EXPECT_TRUE(f.degenerate);
  EXPECT_EQ(f.f, 0.0);
  EXPECT_THROW(pggm::f_score(mask({0}), mask({1, 0})), pggm::DimensionMismatch);
}

TEST(Mspe, ExactModelAndHandExample) {
  pggm::Rng gen(1);
  pggm::Dataset d;
  d.X = testing_support::random_matrix(gen, 6, 3);
  const Eigen::MatrixXd b = testing_support::random_matrix(gen, 3, 2);
  d.Y = d.X * b;
  EXPECT_LT(pggm::mspe(b, d), 1e-28);

  pggm::Dataset h;
  h.X = Eigen::MatrixXd::Identity(2, 2);
  h.Y.resize(2, 1);
  h.Y << 1.0, 3.0;
  Eigen::MatrixXd bh(2, 1);
  bh << 0.0, 1.0;
  EXPECT_DOUBLE_EQ(pggm::mspe(bh, h), (1.0 + 4.0) / 2.0);
  EXPECT_THROW(pggm::mspe(Eigen::MatrixXd::Zero(3, 1), h), pggm::DimensionMismatch);
}

TEST(Aggregate, MatchesSortedMedianAndTwoPassSd) {
  pggm::Rng gen(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(gen.uniform_index(30));
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = gen.normal();
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const double med = n % 2 ? sorted[static_cast<std::size_t>(n / 2)]
                             : 0.5 * (sorted[static_cast<std::size_t>(n / 2 - 1)] + sorted[static_cast<std::size_t>(n / 2)]);
    const auto s = pggm::aggregate(v);
    ASSERT_DOUBLE_EQ(s.median, med);
    ASSERT_EQ(s.count, n);
    if (n > 1) ASSERT_NEAR(s.sd, testing_support::mean_sd(v).sd, 1e-12);
    else ASSERT_EQ(s.sd, 0.0);
  }
  EXPECT_THROW(pggm::aggregate({}), pggm::InvalidParameter);
}

TEST(Aggregate, Runs) {
  const auto a = pggm::aggregate_runs({{{"f", 1.0}, {"m", 2.0}}, {{"f", 0.0}, {"m", 4.0}}, {{"f", 1.0}}});
  EXPECT_DOUBLE_EQ(a.at("f").median, 1.0);
  EXPECT_EQ(a.at("m").count, 2);
  EXPECT_DOUBLE_EQ(a.at("m").median, 3.0);
}

TEST(Summarize, ConstantChain) {
  Eigen::MatrixXd d(1, 3);
  d << 0.0, 1.5, 0.0;
  const auto s = pggm::summarize(chain_of({d, d, d}, Eigen::MatrixXd::Constant(1, 1, 2.0)));
  EXPECT_EQ(s.support, mask({0, 1, 0}));
  EXPECT_DOUBLE_EQ(s.Delta_hat(0, 1), 1.5);
  EXPECT_DOUBLE_EQ(s.B_hat(1, 0), -0.75);
  EXPECT_DOUBLE_EQ(s.inclusion(1), 1.0);
  EXPECT_EQ(s.draws, 3u);
}

TEST(Summarize, MostlySpikeColumnIsZero) {
  std::vector<Eigen::MatrixXd> draws;
  for (int t = 0; t < 10; ++t) draws.push_back(Eigen::MatrixXd::Constant(1, 1, t < 6 ? 0.0 : 1.0 + t));
  const auto s = pggm::summarize(chain_of(draws, Eigen::MatrixXd::Identity(1, 1)));
  EXPECT_DOUBLE_EQ(s.inclusion(0), 0.4);
  EXPECT_EQ(s.support, mask({0}));
  EXPECT_EQ(s.B_hat(0, 0), 0.0);
}

TEST(Summarize, MedianIncludesSpikeDraws) {
  // 3 of 5 draws non-zero: the median over all five is the smallest non-zero value.
  std::vector<Eigen::MatrixXd> draws;
  for (double v : {0.0, 2.0, 0.0, 3.0, 5.0}) draws.push_back(Eigen::MatrixXd::Constant(1, 1, v));
  const auto s = pggm::summarize(chain_of(draws, Eigen::MatrixXd::Identity(1, 1)));
  EXPECT_DOUBLE_EQ(s.Delta_hat(0, 0), 2.0);
}

TEST(Summarize, EmptyChainRejected) {
  pggm::ChainOutput c;
  EXPECT_THROW(pggm::summarize(c), pggm::InvalidParameter);
}
