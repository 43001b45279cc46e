#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mctl/env.hpp"
#include "mctl/gp.hpp"

namespace mctl {

enum class Encoding { kContinuous, kDiscrete };

/// Flat policy: `slots` actions (1 for context-free, 5 for contextual), each either
/// two coverage fractions (continuous) or one grid index (discrete).
struct PolicyVector {
  Encoding encoding = Encoding::kContinuous;
  Eigen::VectorXd values;
};

class PolicySpace {
 public:
  PolicySpace(Encoding encoding, int slots, DiscreteActionSet grid = DiscreteActionSet{11});

  Encoding encoding() const { return encoding_; }
  int slots() const { return slots_; }
  int dims() const { return encoding_ == Encoding::kContinuous ? 2 * slots_ : slots_; }
  const DiscreteActionSet& grid() const { return grid_; }

  PolicyVector sample(Rng& rng) const;
  double sample_gene(Rng& rng) const;
  /// Actions for years 1..5; single-slot policies repeat their action.
  std::array<Action, kYears> decode(const PolicyVector& x) const;
  /// Coordinates in [0,1]^dims used as GP inputs.
  Eigen::VectorXd to_unit(const PolicyVector& x) const;
  void validate(const PolicyVector& x) const;

 private:
  Encoding encoding_;
  int slots_;
  DiscreteActionSet grid_;
};

/// Ask/tell interface shared by the black-box baselines. Every `ask` must be
/// followed by exactly one `tell` carrying the observed reward.
class BlackBoxOptimizer {
 public:
  explicit BlackBoxOptimizer(PolicySpace space) : space_(std::move(space)) {}
  virtual ~BlackBoxOptimizer() = default;

  virtual PolicyVector ask() = 0;
  virtual void tell(double reward) = 0;
  /// True once the optimizer has no further proposals of its own.
  virtual bool finished() const { return false; }

  const PolicySpace& space() const { return space_; }
  bool has_best() const { return evaluations_ > 0; }
  const PolicyVector& best() const { return best_; }
  double best_reward() const { return best_reward_; }
  int evaluations() const { return evaluations_; }

 protected:
  void record(const PolicyVector& x, double reward);

  PolicySpace space_;

 private:
  PolicyVector best_;
  double best_reward_ = 0.0;
  int evaluations_ = 0;
};

class RandomSearch : public BlackBoxOptimizer {
 public:
  RandomSearch(PolicySpace space, std::uint64_t seed);
  PolicyVector ask() override;
  void tell(double reward) override;

 private:
  Rng rng_;
  PolicyVector pending_;
};

struct GaConfig {
  int max_iterations = 5;
  int population = 87;
  double mutation_prob = 0.1;
  double elite_ratio = 0.01;
  double crossover_prob = 0.5;
  double parents_portion = 0.3;
  int max_evaluations = 399;

  void validate() const;
  int elite_count() const;
  int parent_count() const;
};

/// Elitist genetic algorithm with truncation + fitness-proportional parent
/// selection, uniform crossover and per-gene resampling mutation.
class GeneticAlgorithm : public BlackBoxOptimizer {
 public:
  GeneticAlgorithm(GaConfig config, PolicySpace space, std::uint64_t seed);

  PolicyVector ask() override;
  void tell(double reward) override;
  bool finished() const override;

  /// Best fitness of each generation, including carried-over elites.
  const std::vector<double>& generation_best() const { return generation_best_; }
  int generation() const { return generation_; }

 private:
  struct Individual {
    PolicyVector x;
    double fitness = 0.0;
    bool evaluated = false;
  };

  void advance();
  void close_generation();
  void breed();

  GaConfig config_;
  Rng rng_;
  std::vector<Individual> population_;
  std::size_t cursor_ = 0;
  int generation_ = 0;
  std::vector<double> generation_best_;
  bool generation_closed_ = false;
};

/// Acquisition functions on posterior (mean, sd), written for maximization.
double upper_confidence_bound(double mean, double sd, double kappa);
double expected_improvement(double mean, double sd, double best);
double probability_of_improvement(double mean, double sd, double best);

/// Soft-max portfolio over {UCB, EI, PI} driven by accumulated gains.
struct HedgeState {
  static constexpr int kArms = 3;
  std::array<double, kArms> gains{};
  double eta = 1.0;

  std::array<double, kArms> probabilities() const;
};

struct BoConfig {
  int n_calls = 399;
  int n_initial_points = 10;
  double kappa = 1.96;
  int n_points = 10000;
  double eta = 1.0;
  double noise_variance = 0.1;
  double signal_variance = 1.0;
  double length_scale = 1.0;
  int max_points = 500;

  void validate() const;
};

/// Bayesian optimization with a Matern-5/2 GP and GP-hedge acquisition choice.
class BayesOpt : public BlackBoxOptimizer {
 public:
  BayesOpt(BoConfig config, PolicySpace space, std::uint64_t seed);

  PolicyVector ask() override;
  void tell(double reward) override;
  bool finished() const override { return evaluations() >= config_.n_calls; }

  const HedgeState& hedge() const { return hedge_; }
  int fallback_count() const { return fallbacks_; }
  /// Portfolio member chosen on the last model-based ask (0 UCB, 1 EI, 2 PI), or -1.
  int last_choice() const { return last_choice_; }
  const gp::GpModel<double>& model() const { return model_; }

 private:
  void refit();

  BoConfig config_;
  Rng rng_;
  HedgeState hedge_;
  std::vector<Eigen::VectorXd> inputs_;
  std::vector<double> rewards_;
  gp::GpModel<double> model_;
  gp::TargetScaler<double> scaler_;
  bool model_ready_ = false;
  std::vector<Eigen::VectorXd> proposals_;
  PolicyVector pending_;
  Eigen::VectorXd pending_unit_;
  int fallbacks_ = 0;
  int last_choice_ = -1;
};

struct SearchResult {
  PolicyVector best;
  double best_reward = 0.0;
  int evaluations = 0;
  std::vector<double> generation_best;
};

using Objective = std::function<double(const PolicyVector&)>;

SearchResult random_search(int budget, const PolicySpace& space, const Objective& objective,
                           std::uint64_t seed);
SearchResult ga_run(const GaConfig& config, const PolicySpace& space, const Objective& objective,
                    std::uint64_t seed);
SearchResult bayes_opt_run(const BoConfig& config, const PolicySpace& space, const Objective& objective,
                           std::uint64_t seed);

}  // namespace mctl
