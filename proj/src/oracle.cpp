#include "mctl/oracle.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mctl {

double sequence_reward(const std::array<Action, kYears>& actions, const SurrogateParams& params) {
  double r = 0.0;
  double total = 0.0;
  for (int t = 0; t < kYears; ++t) {
    const Action& a = actions[static_cast<std::size_t>(t)];
    total += surrogate_mean_reward(t + 1, r, a, params);
    r = surrogate_next_resistance(r, a, params);
  }
  return total;
}

namespace {

std::array<Action, kYears> decode(const std::array<int, kYears>& idx, const DiscreteActionSet& grid) {
  std::array<Action, kYears> out{};
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = grid.action(idx[t]);
  return out;
}

int best_immediate(int year, double resistance, const SurrogateParams& p, const DiscreteActionSet& grid) {
  int best = 0;
  double best_r = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid.size(); ++j) {
    const double r = surrogate_mean_reward(year, resistance, grid.action(j), p);
    if (r > best_r) {
      best_r = r;
      best = j;
    }
  }
  return best;
}

// Piecewise-linear interpolation of `v` sampled on a uniform grid over [0,1].
double interpolate(const std::vector<double>& v, double x) {
  const double pos = x * static_cast<double>(v.size() - 1);
  const auto lo = std::min(static_cast<std::size_t>(pos), v.size() - 2);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

}  // namespace

OracleReport surrogate_oracle(const SurrogateParams& params, const DiscreteActionSet& grid, int resistance_points) {
  if (resistance_points < 2) throw std::invalid_argument("resistance grid needs at least 2 points");
  params.validate();
  OracleReport rep;

  rep.context_free_best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid.size(); ++j) {
    std::array<Action, kYears> seq;
    seq.fill(grid.action(j));
    const double r = sequence_reward(seq, params);
    if (r > rep.context_free_best) {
      rep.context_free_best = r;
      rep.context_free_index = j;
    }
  }

  for (int t = 1; t <= kYears; ++t) {
    rep.per_year_greedy_indices[static_cast<std::size_t>(t - 1)] = best_immediate(t, 0.0, params, grid);
  }
  rep.per_year_greedy = sequence_reward(decode(rep.per_year_greedy_indices, grid), params);

  double r = 0.0;
  for (int t = 1; t <= kYears; ++t) {
    const int j = best_immediate(t, r, params, grid);
    rep.myopic_indices[static_cast<std::size_t>(t - 1)] = j;
    r = surrogate_next_resistance(r, grid.action(j), params);
  }
  rep.myopic = sequence_reward(decode(rep.myopic_indices, grid), params);

  // Backward induction over (year, resistance grid point).
  const auto n = static_cast<std::size_t>(resistance_points);
  std::vector<std::vector<double>> values(kYears + 1, std::vector<double>(n, 0.0));
  for (int t = kYears; t >= 1; --t) {
    std::vector<double>& cur = values[static_cast<std::size_t>(t - 1)];
    const std::vector<double>& nxt = values[static_cast<std::size_t>(t)];
    for (std::size_t i = 0; i < n; ++i) {
      const double res = static_cast<double>(i) / static_cast<double>(n - 1);
      double best = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < grid.size(); ++j) {
        const Action a = grid.action(j);
        const double v = surrogate_mean_reward(t, res, a, params) +
                         interpolate(nxt, surrogate_next_resistance(res, a, params));
        best = std::max(best, v);
      }
      cur[i] = best;
    }
  }
  rep.dp_value = values[0][0];

  r = 0.0;
  for (int t = 1; t <= kYears; ++t) {
    const std::vector<double>& nxt = values[static_cast<std::size_t>(t)];
    int best_j = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid.size(); ++j) {
      const Action a = grid.action(j);
      const double v = surrogate_mean_reward(t, r, a, params) + interpolate(nxt, surrogate_next_resistance(r, a, params));
      if (v > best) {
        best = v;
        best_j = j;
      }
    }
    rep.dp_indices[static_cast<std::size_t>(t - 1)] = best_j;
    r = surrogate_next_resistance(r, grid.action(best_j), params);
  }
  rep.dp_sequence_reward = sequence_reward(decode(rep.dp_indices, grid), params);
  return rep;
}

}  // namespace mctl
