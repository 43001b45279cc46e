#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mctl/blackbox.hpp"
#include "mctl/env.hpp"

namespace mctl {

enum class Algorithm {
  kEpsilonGreedy,
  kUcb,
  kGradientBandit,
  kGpUcb,
  kCgpUcb,
  kQLearning,
  kTdCucb,
  kReinforce,
  kRandom,
  kGa,
  kGaDiscrete,
  kBo,
  kBoDiscrete,
};

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);
const std::vector<Algorithm>& all_algorithms();

/// Whether `a` is defined for formulation `f`.
bool compatible(Algorithm a, Formulation f);

/// Every tunable learner setting, with the defaults used in the experiments.
struct Hyperparameters {
  int grid_size = 11;

  double alpha = 0.9;
  double ucb_c = 2.0;
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  int epsilon_decay_episodes = 200;

  double pg_bandit_lr = 0.01;
  double pg_mdp_lr = 0.001;
  int pg_hidden = 10;
  double pg_init_scale = 0.1;
  double discount = 0.99;

  std::string gp_beta_schedule = "fixed";  // or "time_varying"
  double gp_beta = 90.0;
  double gp_delta = 0.3;
  double gp_variance = 1.0;
  double gp_length_scale = 1.0;
  double gp_rbf_variance = 1.0;
  double gp_rbf_length_scale = 1.0;
  double gp_noise = 0.1;
  int gp_refit_every = 1;
  int cgp_refit_every = 2;
  int gp_max_points = 500;

  GaConfig ga;
  BoConfig bo;
};

/// A learner driven episode by episode by the harness.
class Agent {
 public:
  virtual ~Agent() = default;

  /// `episode` is 1-based.
  virtual void begin_episode(int episode) = 0;
  /// Training-time action for `year`; may explore.
  virtual Action act(int year) = 0;
  /// Consumes the finished episode through the agent's formulation.
  virtual void learn(const EpisodeTrace& trace) = 0;
  /// Exploitation-only action; never mutates learner state.
  virtual Action greedy_action(int year) const = 0;
  virtual nlohmann::json state() const = 0;
};

/// Throws std::invalid_argument for incompatible (algorithm, formulation) pairs.
std::unique_ptr<Agent> make_agent(Algorithm algorithm, Formulation formulation, const Hyperparameters& hp,
                                  std::uint64_t seed);

}  // namespace mctl
