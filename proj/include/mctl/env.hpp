#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace mctl {

using Rng = std::mt19937_64;

/// Number of yearly decisions in one episode.
inline constexpr int kYears = 5;

/// Coverage fractions for insecticide-treated nets and indoor residual spraying.
struct Action {
  double itn = 0.0;
  double irs = 0.0;

  bool valid() const { return itn >= 0.0 && itn <= 1.0 && irs >= 0.0 && irs <= 1.0; }
  friend bool operator==(const Action&, const Action&) = default;
};

/// Uniform k x k grid over [0,1]^2, indexed row-major with ITN as the major axis.
class DiscreteActionSet {
 public:
  explicit DiscreteActionSet(int grid_size = 11);

  int grid_size() const { return k_; }
  int size() const { return k_ * k_; }
  double grid_value(int j) const { return static_cast<double>(j) / static_cast<double>(k_ - 1); }

  Action action(int index) const;
  /// Inverse of action(); off-grid coordinates snap to the nearest grid value.
  int index(const Action& a) const;

 private:
  int k_;
};

Action discretize_index(int index, int grid_size);

/// Parameters of the closed-form surrogate for the epidemiological simulator.
/// All values are invented stand-ins; see README for their meaning.
struct SurrogateParams {
  std::array<double, kYears> year_weights{0.9, 0.7, 0.5, 0.3, 0.1};
  double resistance_decay = 0.7;
  double resistance_gain = 0.5;
  double resistance_penalty = 0.8;
  double interaction = 0.3;
  double benefit_scale = 100.0;
  double cost_scale = 20.0;
  double noise_sd = 5.0;
  bool noise_enabled = true;

  /// Throws std::invalid_argument when a field leaves its documented range.
  void validate() const;
};

class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Noise-free immediate reward of applying `a` in `year` under `resistance`.
double surrogate_mean_reward(int year, double resistance, const Action& a, const SurrogateParams& p);
double surrogate_next_resistance(double resistance, const Action& a, const SurrogateParams& p);

struct StepOutcome {
  double reward = 0.0;
  double next_resistance = 0.0;
};

StepOutcome surrogate_step(int year, double resistance, const Action& a, const SurrogateParams& p,
                           Rng& rng);

struct Step {
  int year = 1;
  Action action;
  double reward = 0.0;
};

struct EpisodeTrace {
  std::array<Step, kYears> steps{};
  double episodic_reward = 0.0;
};

/// Stateful episodic environment. Each instance owns its noise stream and
/// counts every step it executes.
class SurrogateEnv {
 public:
  explicit SurrogateEnv(SurrogateParams params = {}, std::uint64_t seed = 0);

  struct StepResult {
    double reward;
    int year;
    bool terminal;
  };

  void reset();
  StepResult step(const Action& a);

  template <typename Policy>
  EpisodeTrace run_episode(Policy&& policy) {
    reset();
    EpisodeTrace trace;
    for (int t = 0; t < kYears; ++t) {
      const int year = year_;
      const Action a = policy(year);
      const auto res = step(a);
      trace.steps[static_cast<std::size_t>(t)] = Step{year, a, res.reward};
      trace.episodic_reward += res.reward;
    }
    return trace;
  }

  int year() const { return year_; }
  double resistance() const { return resistance_; }
  std::int64_t steps_taken() const { return steps_; }
  const SurrogateParams& params() const { return params_; }
  Rng& rng() { return rng_; }

 private:
  SurrogateParams params_;
  Rng rng_;
  int year_ = 1;
  double resistance_ = 0.0;
  bool done_ = false;
  std::int64_t steps_ = 0;
};

enum class Formulation { kContextFree, kContextual, kMdp };

std::string_view to_string(Formulation f);
/// Accepts "context_free", "contextual" and "mdp".
Formulation parse_formulation(std::string_view name);

struct ContextualObservation {
  int year;
  Action action;
  double reward;
};

struct Transition {
  int state;
  Action action;
  double reward;
  int next_state;
  bool terminal;
};

std::array<ContextualObservation, kYears> contextual_observations(const EpisodeTrace& trace);
std::array<Transition, kYears> mdp_transitions(const EpisodeTrace& trace);

/// One action per episode, replayed every year; only the episodic reward is visible.
class ContextFreeView {
 public:
  explicit ContextFreeView(SurrogateEnv& env) : env_(env) {}
  double play(const Action& a);
  const EpisodeTrace& last_trace() const { return last_; }

 private:
  SurrogateEnv& env_;
  EpisodeTrace last_;
};

/// Per-year actions; exposes (year, action, immediate reward) for years 1..5.
class ContextualView {
 public:
  explicit ContextualView(SurrogateEnv& env) : env_(env) {}
  template <typename Policy>
  std::array<ContextualObservation, kYears> play(Policy&& policy) {
    return contextual_observations(env_.run_episode(std::forward<Policy>(policy)));
  }

 private:
  SurrogateEnv& env_;
};

/// Per-year actions; exposes transitions with a terminal flag on the year-5 step.
class MdpView {
 public:
  explicit MdpView(SurrogateEnv& env) : env_(env) {}
  template <typename Policy>
  std::array<Transition, kYears> play(Policy&& policy) {
    return mdp_transitions(env_.run_episode(std::forward<Policy>(policy)));
  }

 private:
  SurrogateEnv& env_;
};

}  // namespace mctl
