#include "mctl/tabular.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mctl {

namespace {

void check_action(int action, Eigen::Index size) {
  if (action < 0 || action >= size) {
    throw std::out_of_range("action index " + std::to_string(action) + " outside table of size " +
                            std::to_string(size));
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("learning rate must lie in (0,1]");
  }
}

}  // namespace

int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() == 0) {
    throw std::invalid_argument("argmax of an empty vector");
  }
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<int>(best);
}

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& preferences) {
  const double shift = preferences.maxCoeff();
  Eigen::VectorXd e = (preferences.array() - shift).exp().matrix();
  return e / e.sum();
}

int sample_categorical(const Eigen::Ref<const Eigen::VectorXd>& probs, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding left u above the accumulated mass; fall back to the last supported index.
  for (Eigen::Index i = probs.size() - 1; i >= 0; --i) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return 0;
}

ValueTable::ValueTable(int actions, double alpha_)
    : q(Eigen::VectorXd::Zero(actions)), n(Eigen::VectorXi::Zero(actions)), alpha(alpha_) {
  check_alpha(alpha_);
}

void q_update(ValueTable& table, int action, double reward) {
  check_action(action, table.q.size());
  double& q = table.q[action];
  q = q + table.alpha * (reward - q);
  ++table.n[action];
}

int select_epsilon_greedy(const Eigen::Ref<const Eigen::VectorXd>& q, double eps, Rng& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0,1]");
  }
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < eps) {
    return std::uniform_int_distribution<int>(0, static_cast<int>(q.size()) - 1)(rng);
  }
  return argmax_lowest(q);
}

int select_epsilon_greedy(const ValueTable& table, double eps, Rng& rng) {
  return select_epsilon_greedy(table.q, eps, rng);
}

int select_ucb(const Eigen::Ref<const Eigen::VectorXd>& q, const Eigen::Ref<const Eigen::VectorXi>& n,
               int episode, double c) {
  if (episode < 1) throw std::invalid_argument("UCB episode counter starts at 1");
  if (!(c > 0.0)) throw std::invalid_argument("UCB exploration coefficient must be positive");
  const double log_i = std::log(static_cast<double>(episode));
  Eigen::Index best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < q.size(); ++a) {
    if (n[a] == 0) return static_cast<int>(a);
    const double score = q[a] + c * std::sqrt(log_i / static_cast<double>(n[a]));
    if (score > best_score) {
      best_score = score;
      best = a;
    }
  }
  return static_cast<int>(best);
}

int select_ucb(const ValueTable& table, int episode, double c) {
  return select_ucb(table.q, table.n, episode, c);
}

ContextualValueTable::ContextualValueTable(int actions, double alpha_)
    : q(Eigen::MatrixXd::Zero(kYears, actions)),
      n(Eigen::MatrixXi::Zero(kYears, actions)),
      alpha(alpha_) {
  check_alpha(alpha_);
}

void contextual_update(ContextualValueTable& table, int year, int action, double reward) {
  if (year < 1 || year > kYears) {
    throw std::out_of_range("year " + std::to_string(year) + " outside 1..5");
  }
  check_action(action, table.q.cols());
  double& q = table.q(year - 1, action);
  q = q + table.alpha * (reward - q);
  ++table.n(year - 1, action);
}

double EpsilonSchedule::at(int episode) const {
  if (decay_episodes <= 1) return end;
  const int elapsed = std::max(episode - 1, 0);
  if (elapsed >= decay_episodes - 1) return end;
  const double frac = static_cast<double>(elapsed) / static_cast<double>(decay_episodes - 1);
  return start + (end - start) * frac;
}

PreferenceTable::PreferenceTable(int actions) : h(Eigen::VectorXd::Zero(actions)) {}

void gradient_bandit_step(PreferenceTable& table, int chosen, double reward, double alpha) {
  check_action(chosen, table.h.size());
  if (!(alpha > 0.0)) throw std::invalid_argument("gradient bandit step size must be positive");
  const Eigen::VectorXd pi = table.policy();
  const double advantage = reward - table.baseline;
  // Chosen action: +alpha*adv*(1 - pi); every other action: -alpha*adv*pi.
  table.h -= (alpha * advantage) * pi;
  table.h[chosen] += alpha * advantage;
  ++table.count;
  table.baseline += (reward - table.baseline) / static_cast<double>(table.count);
}

}  // namespace mctl
