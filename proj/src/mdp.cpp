#include "mctl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mctl {

namespace {

void check_state(int state) {
  if (state < 1 || state > kYears) {
    throw std::out_of_range("state " + std::to_string(state) + " outside 1..5");
  }
}

}  // namespace

QTable::QTable(int actions, double alpha_, double discount_)
    : q(Eigen::MatrixXd::Zero(kYears, actions)),
      n(Eigen::MatrixXi::Zero(kYears, actions)),
      alpha(alpha_),
      discount(discount_) {
  if (!(alpha_ > 0.0 && alpha_ <= 1.0)) throw std::invalid_argument("learning rate must lie in (0,1]");
  if (!(discount_ >= 0.0 && discount_ <= 1.0)) throw std::invalid_argument("discount must lie in [0,1]");
}

void q_learning_update(QTable& table, int state, int action, double reward, int next_state,
                       bool terminal) {
  check_state(state);
  if (action < 0 || action >= table.actions()) {
    throw std::out_of_range("action index " + std::to_string(action) + " outside table");
  }
  double target = reward;
  if (!terminal) {
    check_state(next_state);
    target = reward + table.discount * table.q.row(next_state - 1).maxCoeff();
  }
  double& q = table.q(state - 1, action);
  q = q + table.alpha * (target - q);
  ++table.n(state - 1, action);
}

int select_td_cucb(const QTable& table, int state, int episode, double c) {
  check_state(state);
  const Eigen::VectorXd q = table.q.row(state - 1).transpose();
  const Eigen::VectorXi n = table.n.row(state - 1).transpose();
  return select_ucb(q, n, episode, c);
}

std::array<double, kYears> discounted_returns(const std::array<double, kYears>& rewards,
                                              double discount) {
  std::array<double, kYears> g{};
  double acc = 0.0;
  for (int t = kYears - 1; t >= 0; --t) {
    acc = rewards[static_cast<std::size_t>(t)] + discount * acc;
    g[static_cast<std::size_t>(t)] = acc;
  }
  return g;
}

void ReturnTracker::add(double value) {
  ++count_;
  const double delta = value - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (value - mean_);
}

double ReturnTracker::variance() const {
  return count_ < 2 ? 0.0 : m2_ / static_cast<double>(count_ - 1);
}

double ReturnTracker::sd() const { return count_ < 2 ? 1.0 : std::sqrt(variance()); }

PolicyNetwork::PolicyNetwork(int actions, int hidden, double learning_rate)
    : w_in_(Eigen::MatrixXd::Zero(hidden, kYears)),
      b_hidden_(Eigen::VectorXd::Zero(hidden)),
      w_out_(Eigen::MatrixXd::Zero(actions, hidden)),
      b_out_(Eigen::VectorXd::Zero(actions)),
      learning_rate_(learning_rate) {
  if (actions < 1 || hidden < 1) throw std::invalid_argument("network dimensions must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

void PolicyNetwork::initialize(Rng& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (Eigen::Index i = 0; i < w_in_.size(); ++i) w_in_.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < w_out_.size(); ++i) w_out_.data()[i] = u(rng);
  b_hidden_.setZero();
  b_out_.setZero();
}

Eigen::VectorXd PolicyNetwork::hidden_activation(int year) const {
  check_state(year);
  // One-hot input selects a column of the input weights.
  return (w_in_.col(year - 1) + b_hidden_).array().tanh().matrix();
}

Eigen::VectorXd PolicyNetwork::logits(int year) const {
  return w_out_ * hidden_activation(year) + b_out_;
}

Eigen::VectorXd PolicyNetwork::forward(int year) const { return softmax(logits(year)); }

double PolicyNetwork::log_prob(int year, int action) const {
  const Eigen::VectorXd z = logits(year);
  const double shift = z.maxCoeff();
  return z[action] - shift - std::log((z.array() - shift).exp().sum());
}

Eigen::Index PolicyNetwork::parameter_count() const {
  return w_in_.size() + b_hidden_.size() + w_out_.size() + b_out_.size();
}

Eigen::VectorXd PolicyNetwork::parameters() const {
  Eigen::VectorXd theta(parameter_count());
  theta << w_in_.reshaped(), b_hidden_, w_out_.reshaped(), b_out_;
  return theta;
}

void PolicyNetwork::set_parameters(const Eigen::Ref<const Eigen::VectorXd>& theta) {
  if (theta.size() != parameter_count()) {
    throw std::invalid_argument("parameter vector has wrong length");
  }
  Eigen::Index off = 0;
  auto take = [&](auto& dst) {
    dst.reshaped() = theta.segment(off, dst.size());
    off += dst.size();
  };
  take(w_in_);
  take(b_hidden_);
  take(w_out_);
  take(b_out_);
}

Eigen::VectorXd PolicyNetwork::grad_log_prob(int year, int action) const {
  if (action < 0 || action >= actions()) throw std::out_of_range("action index outside network output");
  const Eigen::VectorXd h = hidden_activation(year);
  const Eigen::VectorXd pi = softmax(w_out_ * h + b_out_);

  // d log pi_a / d logits = e_a - pi
  Eigen::VectorXd d_logits = -pi;
  d_logits[action] += 1.0;

  const Eigen::MatrixXd d_w_out = d_logits * h.transpose();
  const Eigen::VectorXd d_h = w_out_.transpose() * d_logits;
  const Eigen::VectorXd d_pre = d_h.array() * (1.0 - h.array().square());

  Eigen::MatrixXd d_w_in = Eigen::MatrixXd::Zero(w_in_.rows(), w_in_.cols());
  d_w_in.col(year - 1) = d_pre;

  Eigen::VectorXd grad(parameter_count());
  grad << d_w_in.reshaped(), d_pre, d_w_out.reshaped(), d_logits;
  return grad;
}

void reinforce_update(PolicyNetwork& net, const EpisodeTrace& episode, ReturnTracker& tracker,
                      double discount, const DiscreteActionSet& actions) {
  std::array<double, kYears> rewards{};
  for (std::size_t t = 0; t < rewards.size(); ++t) rewards[t] = episode.steps[t].reward;
  const auto returns = discounted_returns(rewards, discount);

  const double baseline = tracker.mean();
  const double scale = std::max(tracker.sd(), 1e-8);

  Eigen::VectorXd step = Eigen::VectorXd::Zero(net.parameter_count());
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    const double advantage = (returns[t] - baseline) / scale;
    if (advantage == 0.0) continue;
    const auto& s = episode.steps[t];
    step += advantage * net.grad_log_prob(s.year, actions.index(s.action));
  }
  if (!step.isZero(0.0)) {
    net.set_parameters(net.parameters() + net.learning_rate() * step);
  }
  tracker.add(returns[0]);
}

}  // namespace mctl
