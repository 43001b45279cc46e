#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "mctl/tabular.hpp"

using namespace mctl;

TEST(QUpdate, OneStepArithmetic) {
  ValueTable t(121, 0.9);
  q_update(t, 4, 100.0);
  EXPECT_DOUBLE_EQ(t.q[4], 90.0);
  q_update(t, 4, 100.0);
  EXPECT_DOUBLE_EQ(t.q[4], 99.0);
  EXPECT_EQ(t.n[4], 2);
  for (int a = 0; a < 121; ++a) {
    if (a != 4) {
      EXPECT_EQ(t.q[a], 0.0);
      EXPECT_EQ(t.n[a], 0);
    }
  }
}

TEST(QUpdate, FixedPoint) {
  for (double alpha : {0.1, 0.5, 0.9, 1.0}) {
    ValueTable t(3, alpha);
    t.q[1] = 37.25;
    q_update(t, 1, 37.25);
    EXPECT_EQ(t.q[1], 37.25);
  }
}

TEST(QUpdate, Errors) {
  ValueTable t(3, 0.5);
  EXPECT_THROW(q_update(t, 3, 1.0), std::out_of_range);
  EXPECT_THROW(ValueTable(3, 0.0), std::invalid_argument);
  EXPECT_THROW(ValueTable(3, 1.5), std::invalid_argument);
}

TEST(EpsilonGreedy, ZeroEpsTieBreaksLow) {
  ValueTable t(121, 0.9);
  Rng rng(0);
  EXPECT_EQ(select_epsilon_greedy(t, 0.0, rng), 0);
  t.q[17] = 1.0;
  EXPECT_EQ(select_epsilon_greedy(t, 0.0, rng), 17);
}

TEST(EpsilonGreedy, FullEpsIsUniform) {
  ValueTable t(121, 0.9);
  t.q[5] = 100.0;
  Rng rng(2024);
  const int draws = 100000;
  std::vector<int> counts(121, 0);
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(select_epsilon_greedy(t, 1.0, rng))];
  const double p = 1.0 / 121.0;
  const double mean = draws * p;
  const double sd = std::sqrt(draws * p * (1.0 - p));
  int outside = 0;
  for (int c : counts) outside += std::abs(c - mean) > 3.0 * sd;
  // 121 cells at 3 sigma: a handful of excursions is expected, a skewed sampler is not
  EXPECT_LE(outside, 3);
}

TEST(EpsilonSchedule, LinearDecay) {
  EpsilonSchedule s;
  EXPECT_DOUBLE_EQ(s.at(1), 1.0);
  EXPECT_NEAR(s.at(200), 0.01, 1e-12);
  EXPECT_DOUBLE_EQ(s.at(300), 0.01);
  for (int e = 1; e < 200; ++e) EXPECT_GT(s.at(e), s.at(e + 1));
}

TEST(Ucb, ForcedExplorationOrder) {
  ValueTable t(121, 0.9);
  for (int i = 1; i <= 121; ++i) {
    const int a = select_ucb(t, i, 2.0);
    EXPECT_EQ(a, i - 1);
    q_update(t, a, -static_cast<double>(a));
  }
  for (int a = 0; a < 121; ++a) EXPECT_EQ(t.n[a], 1);
}

TEST(Ucb, EqualBonusesTieBreak) {
  ValueTable t(121, 0.9);
  t.n.setOnes();
  EXPECT_EQ(select_ucb(t, 2, 2.0), 0);
}

TEST(Ucb, FewerVisitsWins) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(2);
  Eigen::VectorXi n(2);
  n << 1, 5;
  const double s0 = 2.0 * std::sqrt(std::log(10.0) / 1.0);
  const double s1 = 2.0 * std::sqrt(std::log(10.0) / 5.0);
  ASSERT_GT(s0, s1);
  EXPECT_EQ(select_ucb(q, n, 10, 2.0), 0);
  n << 5, 1;
  EXPECT_EQ(select_ucb(q, n, 10, 2.0), 1);
}

TEST(Ucb, RejectsBadArguments) {
  ValueTable t(4, 0.9);
  EXPECT_THROW(select_ucb(t, 0, 2.0), std::invalid_argument);
  EXPECT_THROW(select_ucb(t, 1, 0.0), std::invalid_argument);
}

TEST(Contextual, UpdateTouchesOneRow) {
  ContextualValueTable t(121, 0.9);
  contextual_update(t, 2, 7, 50.0);
  EXPECT_DOUBLE_EQ(t.q(1, 7), 45.0);
  EXPECT_EQ(t.n(1, 7), 1);
  EXPECT_EQ(t.q.sum(), 45.0);
  EXPECT_EQ(t.n.sum(), 1);
}

TEST(Contextual, YearsAreIndependent) {
  ContextualValueTable t(121, 0.5);
  contextual_update(t, 1, 9, 10.0);
  contextual_update(t, 4, 9, -30.0);
  EXPECT_DOUBLE_EQ(t.q(0, 9), 5.0);
  EXPECT_DOUBLE_EQ(t.q(3, 9), -15.0);
}

TEST(Contextual, GeometricConvergence) {
  const double alpha = 0.3, R = 12.5;
  ContextualValueTable t(4, alpha);
  for (int k = 1; k <= 40; ++k) {
    contextual_update(t, 3, 2, R);
    EXPECT_NEAR(R - t.q(2, 2), R * std::pow(1.0 - alpha, k), 1e-9);
  }
}

TEST(Contextual, YearOutOfRange) {
  ContextualValueTable t(4, 0.5);
  EXPECT_THROW(contextual_update(t, 0, 1, 1.0), std::out_of_range);
  EXPECT_THROW(contextual_update(t, 6, 1, 1.0), std::out_of_range);
}

TEST(Softmax, SumsToOneAndShiftInvariant) {
  Rng rng(7);
  std::normal_distribution<double> g(0.0, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd h(121);
    for (auto& v : h) v = g(rng);
    const Eigen::VectorXd p = softmax(h);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GE(p.minCoeff(), 0.0);
    const Eigen::VectorXd q = softmax((h.array() + 1234.5).matrix());
    EXPECT_LT((p - q).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Softmax, LargeValuesStayFinite) {
  Eigen::VectorXd h(3);
  h << 1000.0, 999.0, -1000.0;
  const Eigen::VectorXd p = softmax(h);
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p[0] / p[1], std::exp(1.0), 1e-9);
}

TEST(GradientBandit, UniformAtStart) {
  PreferenceTable t(121);
  const Eigen::VectorXd p = t.policy();
  for (int a = 0; a < 121; ++a) EXPECT_NEAR(p[a], 1.0 / 121.0, 1e-15);
}

TEST(GradientBandit, PositiveFirstRewardRaisesChosen) {
  PreferenceTable t(121);
  gradient_bandit_step(t, 10, 5.0, 0.01);
  EXPECT_GT(t.h[10], 0.0);
  for (int a = 0; a < 121; ++a) {
    if (a != 10) {
      EXPECT_LT(t.h[a], 0.0);
    }
  }
}

TEST(GradientBandit, MatchesHandUpdate) {
  PreferenceTable t(4);
  t.h << 0.3, -0.2, 0.1, 0.0;
  t.baseline = 2.0;
  t.count = 3;
  const Eigen::VectorXd h0 = t.h;
  Eigen::VectorXd pi(4);
  double z = 0.0;
  for (int a = 0; a < 4; ++a) z += std::exp(h0[a]);
  for (int a = 0; a < 4; ++a) pi[a] = std::exp(h0[a]) / z;

  gradient_bandit_step(t, 1, 6.0, 0.1);
  const double adv = 6.0 - 2.0;
  for (int a = 0; a < 4; ++a) {
    const double expected = a == 1 ? h0[a] + 0.1 * adv * (1.0 - pi[a]) : h0[a] - 0.1 * adv * pi[a];
    EXPECT_NEAR(t.h[a], expected, 1e-14);
  }
  EXPECT_NEAR(t.baseline, (2.0 * 3 + 6.0) / 4.0, 1e-14);
}

TEST(GradientBandit, PreservesPreferenceSumAndBaselineIsMean) {
  PreferenceTable t(121);
  Rng rng(99);
  std::normal_distribution<double> g(50.0, 30.0);
  std::uniform_int_distribution<int> pick(0, 120);
  std::vector<double> seen;
  for (int step = 0; step < 2000; ++step) {
    const double before = t.h.sum();
    const double r = g(rng);
    seen.push_back(r);
    gradient_bandit_step(t, pick(rng), r, 0.01);
    EXPECT_NEAR(t.h.sum(), before, 1e-9);
    const double mean = std::accumulate(seen.begin(), seen.end(), 0.0) / static_cast<double>(seen.size());
    EXPECT_NEAR(t.baseline, mean, 1e-9);
  }
  EXPECT_EQ(t.count, 2000);
}

TEST(Categorical, FollowsProbabilities) {
  Eigen::VectorXd p(3);
  p << 0.2, 0.5, 0.3;
  Rng rng(5);
  std::vector<int> c(3, 0);
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) ++c[static_cast<std::size_t>(sample_categorical(p, rng))];
  for (int a = 0; a < 3; ++a) {
    const double sd = std::sqrt(draws * p[a] * (1 - p[a]));
    EXPECT_NEAR(c[static_cast<std::size_t>(a)], draws * p[a], 4 * sd);
  }
}
