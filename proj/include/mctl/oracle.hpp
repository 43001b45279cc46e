#pragma once

#include <array>

#include "mctl/env.hpp"

namespace mctl {

/// Noise-free reference optima of the surrogate over the discrete action grid.
struct OracleReport {
  /// Best single action replayed every year.
  double context_free_best = 0.0;
  int context_free_index = 0;
  /// Per-year best action assuming zero resistance, scored under the true dynamics.
  double per_year_greedy = 0.0;
  std::array<int, kYears> per_year_greedy_indices{};
  /// Per-year best immediate reward given the resistance actually reached.
  double myopic = 0.0;
  std::array<int, kYears> myopic_indices{};
  /// Resistance-aware optimum from dynamic programming on a resistance grid.
  double dp_value = 0.0;
  /// DP greedy sequence from zero resistance, scored exactly.
  double dp_sequence_reward = 0.0;
  std::array<int, kYears> dp_indices{};
};

/// Exact episodic reward (noise off) of a fixed action sequence.
double sequence_reward(const std::array<Action, kYears>& actions, const SurrogateParams& params);

OracleReport surrogate_oracle(const SurrogateParams& params, const DiscreteActionSet& grid,
                              int resistance_points = 101);

}  // namespace mctl
