#pragma once

#include <Eigen/Core>

#include "mctl/env.hpp"

namespace mctl {

/// Index of the largest entry; ties resolve to the lowest index.
int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values);

/// Numerically stable soft-max (max-subtracted).
Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& preferences);

/// Draws an index from a probability vector.
int sample_categorical(const Eigen::Ref<const Eigen::VectorXd>& probs, Rng& rng);

/// Action-value estimates Q(a) and visit counts N(a) for a single context.
struct ValueTable {
  ValueTable(int actions, double alpha);

  Eigen::VectorXd q;
  Eigen::VectorXi n;
  double alpha;

  int size() const { return static_cast<int>(q.size()); }
};

/// Q(a) <- Q(a) + alpha (r - Q(a)); N(a) += 1.
void q_update(ValueTable& table, int action, double reward);

/// Greedy with probability 1 - eps, otherwise uniform.
int select_epsilon_greedy(const ValueTable& table, double eps, Rng& rng);
int select_epsilon_greedy(const Eigen::Ref<const Eigen::VectorXd>& q, double eps, Rng& rng);

/// UCB score q + c sqrt(ln(i) / n); untried actions score +inf so every action
/// is tried once, lowest index first.
int select_ucb(const ValueTable& table, int episode, double c);
int select_ucb(const Eigen::Ref<const Eigen::VectorXd>& q, const Eigen::Ref<const Eigen::VectorXi>& n,
               int episode, double c);

/// One value table per year (rows are years 1..5).
struct ContextualValueTable {
  ContextualValueTable(int actions, double alpha);

  Eigen::MatrixXd q;
  Eigen::MatrixXi n;
  double alpha;

  int actions() const { return static_cast<int>(q.cols()); }
};

void contextual_update(ContextualValueTable& table, int year, int action, double reward);

/// Linear decay from `start` at episode 1 to `end` at episode `decay_episodes`, constant afterwards.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.01;
  int decay_episodes = 200;

  /// `episode` is 1-based; episode 1 yields `start`.
  double at(int episode) const;
};

/// Soft-max action preferences H(a) with a running-mean reward baseline.
struct PreferenceTable {
  explicit PreferenceTable(int actions);

  Eigen::VectorXd h;
  double baseline = 0.0;
  long count = 0;

  Eigen::VectorXd policy() const { return softmax(h); }
};

void gradient_bandit_step(PreferenceTable& table, int chosen, double reward, double alpha);

}  // namespace mctl
