#pragma once

#include <array>

#include <Eigen/Core>

#include "mctl/env.hpp"
#include "mctl/tabular.hpp"

namespace mctl {

/// Tabular Q(s,a) over the five yearly states with visit counts N(s,a).
struct QTable {
  QTable(int actions, double alpha, double discount);

  Eigen::MatrixXd q;
  Eigen::MatrixXi n;
  double alpha;
  double discount;

  int actions() const { return static_cast<int>(q.cols()); }
};

/// One-step Q-learning backup. `next_state` is ignored for terminal transitions.
void q_learning_update(QTable& table, int state, int action, double reward, int next_state,
                       bool terminal);

/// UCB over the row of `state`, with per-state visit counts (TD-CUCB).
int select_td_cucb(const QTable& table, int state, int episode, double c);

/// Discounted returns G_t = sum_{k >= t} discount^(k-t) R_k for each step.
std::array<double, kYears> discounted_returns(const std::array<double, kYears>& rewards,
                                              double discount);

/// Running mean and sample variance of returns (Welford).
class ReturnTracker {
 public:
  void add(double value);

  long count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const;
  /// Sample standard deviation; 1.0 until two returns have been seen.
  double sd() const;

 private:
  long count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// One-hot(year) -> tanh hidden layer -> soft-max over actions.
class PolicyNetwork {
 public:
  PolicyNetwork(int actions, int hidden, double learning_rate);

  /// Weights uniform in [-scale, scale], biases zero.
  void initialize(Rng& rng, double scale = 0.1);

  Eigen::VectorXd logits(int year) const;
  Eigen::VectorXd forward(int year) const;
  double log_prob(int year, int action) const;

  /// Gradient of log pi(action | year) with respect to parameters(), flattened
  /// in the same order.
  Eigen::VectorXd grad_log_prob(int year, int action) const;

  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::Ref<const Eigen::VectorXd>& theta);
  Eigen::Index parameter_count() const;

  int actions() const { return static_cast<int>(w_out_.rows()); }
  int hidden() const { return static_cast<int>(w_in_.rows()); }
  double learning_rate() const { return learning_rate_; }

  const Eigen::MatrixXd& input_weights() const { return w_in_; }
  const Eigen::VectorXd& hidden_bias() const { return b_hidden_; }
  const Eigen::MatrixXd& output_weights() const { return w_out_; }
  const Eigen::VectorXd& output_bias() const { return b_out_; }
  Eigen::VectorXd& output_bias() { return b_out_; }

 private:
  Eigen::VectorXd hidden_activation(int year) const;

  Eigen::MatrixXd w_in_;      // hidden x years
  Eigen::VectorXd b_hidden_;  // hidden
  Eigen::MatrixXd w_out_;     // actions x hidden
  Eigen::VectorXd b_out_;     // actions
  double learning_rate_;
};

/// REINFORCE with a z-scored return baseline. Applies
/// theta += lr * sum_t adv_t * grad log pi(a_t | s_t), then records G_1 in `tracker`.
void reinforce_update(PolicyNetwork& net, const EpisodeTrace& episode, ReturnTracker& tracker,
                      double discount, const DiscreteActionSet& actions);

}  // namespace mctl
