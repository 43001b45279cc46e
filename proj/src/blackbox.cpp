#include "mctl/blackbox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mctl/tabular.hpp"

namespace mctl {

namespace {

double normal_pdf(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

}  // namespace

PolicySpace::PolicySpace(Encoding encoding, int slots, DiscreteActionSet grid)
    : encoding_(encoding), slots_(slots), grid_(grid) {
  if (slots != 1 && slots != kYears) {
    throw std::invalid_argument("policy vectors hold either 1 or 5 actions");
  }
}

double PolicySpace::sample_gene(Rng& rng) const {
  if (encoding_ == Encoding::kDiscrete) {
    return static_cast<double>(std::uniform_int_distribution<int>(0, grid_.size() - 1)(rng));
  }
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

PolicyVector PolicySpace::sample(Rng& rng) const {
  PolicyVector x{encoding_, Eigen::VectorXd(dims())};
  for (Eigen::Index i = 0; i < x.values.size(); ++i) x.values[i] = sample_gene(rng);
  return x;
}

void PolicySpace::validate(const PolicyVector& x) const {
  if (x.encoding != encoding_ || x.values.size() != dims()) {
    throw std::invalid_argument("policy vector does not match its search space");
  }
  for (Eigen::Index i = 0; i < x.values.size(); ++i) {
    const double v = x.values[i];
    const bool ok = encoding_ == Encoding::kDiscrete
                        ? (v >= 0.0 && v <= grid_.size() - 1 && v == std::floor(v))
                        : (v >= 0.0 && v <= 1.0);
    if (!ok) throw std::invalid_argument("policy vector gene out of range");
  }
}

std::array<Action, kYears> PolicySpace::decode(const PolicyVector& x) const {
  validate(x);
  std::array<Action, kYears> out{};
  for (int t = 0; t < kYears; ++t) {
    const int slot = slots_ == 1 ? 0 : t;
    out[static_cast<std::size_t>(t)] =
        encoding_ == Encoding::kDiscrete
            ? grid_.action(static_cast<int>(x.values[slot]))
            : Action{x.values[2 * slot], x.values[2 * slot + 1]};
  }
  return out;
}

Eigen::VectorXd PolicySpace::to_unit(const PolicyVector& x) const {
  if (encoding_ == Encoding::kContinuous) return x.values;
  return x.values / static_cast<double>(grid_.size() - 1);
}

void BlackBoxOptimizer::record(const PolicyVector& x, double reward) {
  if (evaluations_ == 0 || reward > best_reward_) {
    best_ = x;
    best_reward_ = reward;
  }
  ++evaluations_;
}

RandomSearch::RandomSearch(PolicySpace space, std::uint64_t seed)
    : BlackBoxOptimizer(std::move(space)), rng_(seed) {}

PolicyVector RandomSearch::ask() {
  pending_ = space_.sample(rng_);
  return pending_;
}

void RandomSearch::tell(double reward) { record(pending_, reward); }

// ---------------------------------------------------------------------------
// Genetic algorithm

void GaConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(mutation_prob) || !prob(elite_ratio) || !prob(crossover_prob) || !prob(parents_portion)) {
    throw std::invalid_argument("GA probabilities must lie in [0,1]");
  }
  if (population < 2) throw std::invalid_argument("GA population must be at least 2");
  if (max_iterations < 0) throw std::invalid_argument("GA iteration count must be non-negative");
  if (max_evaluations < 1) throw std::invalid_argument("GA evaluation budget must be positive");
  if (elite_count() >= population) throw std::invalid_argument("GA elites fill the whole population");
}

int GaConfig::elite_count() const {
  return static_cast<int>(std::ceil(elite_ratio * static_cast<double>(population) - 1e-9));
}

int GaConfig::parent_count() const {
  const int n = static_cast<int>(std::floor(parents_portion * static_cast<double>(population)));
  return std::clamp(n, 2, population);
}

GeneticAlgorithm::GeneticAlgorithm(GaConfig config, PolicySpace space, std::uint64_t seed)
    : BlackBoxOptimizer(std::move(space)), config_(config), rng_(seed) {
  config_.validate();
  population_.reserve(static_cast<std::size_t>(config_.population));
  for (int i = 0; i < config_.population; ++i) {
    population_.push_back(Individual{space_.sample(rng_), 0.0, false});
  }
  advance();
}

bool GeneticAlgorithm::finished() const {
  return evaluations() >= config_.max_evaluations || cursor_ >= population_.size();
}

// Moves the cursor to the next unevaluated individual, closing and breeding
// generations as they complete.
void GeneticAlgorithm::advance() {
  while (true) {
    while (cursor_ < population_.size() && population_[cursor_].evaluated) ++cursor_;
    if (cursor_ < population_.size()) return;
    close_generation();
    if (generation_ >= config_.max_iterations) return;
    breed();
  }
}

void GeneticAlgorithm::close_generation() {
  if (generation_closed_) return;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& ind : population_) {
    if (ind.evaluated) best = std::max(best, ind.fitness);
  }
  generation_best_.push_back(best);
  generation_closed_ = true;
}

void GeneticAlgorithm::breed() {
  std::vector<std::size_t> order(population_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return population_[a].fitness > population_[b].fitness;
  });

  const auto parents = static_cast<std::size_t>(config_.parent_count());
  const double worst = population_[order[parents - 1]].fitness;
  Eigen::VectorXd weights(static_cast<Eigen::Index>(parents));
  for (std::size_t i = 0; i < parents; ++i) weights[static_cast<Eigen::Index>(i)] = population_[order[i]].fitness - worst;
  if (weights.sum() > 0.0) {
    weights /= weights.sum();
  } else {
    weights.setConstant(1.0 / static_cast<double>(parents));
  }

  std::vector<Individual> next;
  next.reserve(population_.size());
  for (int e = 0; e < config_.elite_count(); ++e) next.push_back(population_[order[static_cast<std::size_t>(e)]]);

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  while (next.size() < population_.size()) {
    const auto& p1 = population_[order[static_cast<std::size_t>(sample_categorical(weights, rng_))]].x;
    const auto& p2 = population_[order[static_cast<std::size_t>(sample_categorical(weights, rng_))]].x;
    PolicyVector child = p1;
    if (coin(rng_) < config_.crossover_prob) {
      for (Eigen::Index g = 0; g < child.values.size(); ++g) {
        if (coin(rng_) < 0.5) child.values[g] = p2.values[g];
      }
    }
    for (Eigen::Index g = 0; g < child.values.size(); ++g) {
      if (coin(rng_) < config_.mutation_prob) child.values[g] = space_.sample_gene(rng_);
    }
    next.push_back(Individual{std::move(child), 0.0, false});
  }
  population_ = std::move(next);
  cursor_ = 0;
  ++generation_;
  generation_closed_ = false;
}

PolicyVector GeneticAlgorithm::ask() {
  if (finished()) return best();
  return population_[cursor_].x;
}

void GeneticAlgorithm::tell(double reward) {
  if (finished()) return;
  auto& ind = population_[cursor_];
  ind.fitness = reward;
  ind.evaluated = true;
  record(ind.x, reward);
  if (evaluations() >= config_.max_evaluations) {
    close_generation();
    return;
  }
  advance();
}

// ---------------------------------------------------------------------------
// Bayesian optimization

double upper_confidence_bound(double mean, double sd, double kappa) { return mean + kappa * sd; }

double expected_improvement(double mean, double sd, double best) {
  if (!(sd > 0.0)) return std::max(mean - best, 0.0);
  const double u = (mean - best) / sd;
  return std::max((mean - best) * normal_cdf(u) + sd * normal_pdf(u), 0.0);
}

double probability_of_improvement(double mean, double sd, double best) {
  if (!(sd > 0.0)) return mean > best ? 1.0 : 0.0;
  return normal_cdf((mean - best) / sd);
}

std::array<double, HedgeState::kArms> HedgeState::probabilities() const {
  Eigen::VectorXd g(kArms);
  for (int j = 0; j < kArms; ++j) g[j] = eta * gains[static_cast<std::size_t>(j)];
  const Eigen::VectorXd p = softmax(g);
  return {p[0], p[1], p[2]};
}

void BoConfig::validate() const {
  if (n_initial_points < 1 || n_initial_points >= n_calls) {
    throw std::invalid_argument("BO needs 1 <= n_initial_points < n_calls");
  }
  if (n_points < 1) throw std::invalid_argument("BO candidate count must be positive");
  if (max_points < 1) throw std::invalid_argument("BO training-set cap must be positive");
}

BayesOpt::BayesOpt(BoConfig config, PolicySpace space, std::uint64_t seed)
    : BlackBoxOptimizer(std::move(space)),
      config_(config),
      rng_(seed),
      model_(gp::Kernel<double>::matern52(config.signal_variance, config.length_scale), config.noise_variance) {
  config_.validate();
  hedge_.eta = config_.eta;
}

void BayesOpt::refit() {
  const std::size_t n = std::min(inputs_.size(), static_cast<std::size_t>(config_.max_points));
  const std::size_t first = inputs_.size() - n;
  Eigen::MatrixXd x(space_.dims(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    x.col(static_cast<Eigen::Index>(i)) = inputs_[first + i];
    y[static_cast<Eigen::Index>(i)] = rewards_[first + i];
  }
  scaler_ = gp::TargetScaler<double>::fit(Eigen::Map<const Eigen::VectorXd>(rewards_.data(),
                                                                             static_cast<Eigen::Index>(rewards_.size())));
  try {
    model_.fit(x, scaler_.forward(y));
    model_ready_ = true;
  } catch (const gp::NumericalError&) {
    model_ready_ = false;
  }
}

PolicyVector BayesOpt::ask() {
  proposals_.clear();
  last_choice_ = -1;
  if (evaluations() < config_.n_initial_points || !model_ready_) {
    if (evaluations() >= config_.n_initial_points) ++fallbacks_;
    pending_ = space_.sample(rng_);
    pending_unit_ = space_.to_unit(pending_);
    return pending_;
  }

  std::vector<PolicyVector> candidates;
  candidates.reserve(static_cast<std::size_t>(config_.n_points));
  Eigen::MatrixXd unit(space_.dims(), config_.n_points);
  for (int i = 0; i < config_.n_points; ++i) {
    candidates.push_back(space_.sample(rng_));
    unit.col(i) = space_.to_unit(candidates.back());
  }

  Eigen::VectorXd mean, var;
  try {
    model_.predict(unit, mean, var);
  } catch (const gp::NumericalError&) {
    ++fallbacks_;
    pending_ = space_.sample(rng_);
    pending_unit_ = space_.to_unit(pending_);
    return pending_;
  }
  const Eigen::VectorXd sd = var.cwiseSqrt();
  const double y_best = scaler_.forward(*std::max_element(rewards_.begin(), rewards_.end()));

  std::array<int, HedgeState::kArms> argmax{0, 0, 0};
  std::array<double, HedgeState::kArms> top{};
  top.fill(-std::numeric_limits<double>::infinity());
  for (int i = 0; i < config_.n_points; ++i) {
    const std::array<double, HedgeState::kArms> score{
        upper_confidence_bound(mean[i], sd[i], config_.kappa),
        expected_improvement(mean[i], sd[i], y_best),
        probability_of_improvement(mean[i], sd[i], y_best)};
    for (std::size_t j = 0; j < score.size(); ++j) {
      if (score[j] > top[j]) {
        top[j] = score[j];
        argmax[j] = i;
      }
    }
  }

  const auto p = hedge_.probabilities();
  const Eigen::Vector3d probs(p[0], p[1], p[2]);
  last_choice_ = sample_categorical(probs, rng_);
  for (int idx : argmax) proposals_.push_back(unit.col(idx));
  pending_ = candidates[static_cast<std::size_t>(argmax[static_cast<std::size_t>(last_choice_)])];
  pending_unit_ = space_.to_unit(pending_);
  return pending_;
}

void BayesOpt::tell(double reward) {
  record(pending_, reward);
  inputs_.push_back(pending_unit_);
  rewards_.push_back(reward);
  if (evaluations() < config_.n_initial_points) return;
  refit();
  if (model_ready_ && !proposals_.empty()) {
    Eigen::MatrixXd pts(space_.dims(), static_cast<Eigen::Index>(proposals_.size()));
    for (std::size_t j = 0; j < proposals_.size(); ++j) pts.col(static_cast<Eigen::Index>(j)) = proposals_[j];
    const Eigen::VectorXd mu = model_.predict_mean(pts);
    for (std::size_t j = 0; j < proposals_.size(); ++j) hedge_.gains[j] += mu[static_cast<Eigen::Index>(j)];
  }
  proposals_.clear();
}

// ---------------------------------------------------------------------------

namespace {

SearchResult drive(BlackBoxOptimizer& opt, int budget, const Objective& objective) {
  while (opt.evaluations() < budget && !opt.finished()) {
    const PolicyVector x = opt.ask();
    opt.tell(objective(x));
  }
  return SearchResult{opt.best(), opt.best_reward(), opt.evaluations(), {}};
}

}  // namespace

SearchResult random_search(int budget, const PolicySpace& space, const Objective& objective,
                           std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("random search budget must be at least 1");
  RandomSearch opt(space, seed);
  return drive(opt, budget, objective);
}

SearchResult ga_run(const GaConfig& config, const PolicySpace& space, const Objective& objective,
                    std::uint64_t seed) {
  GeneticAlgorithm opt(config, space, seed);
  auto result = drive(opt, config.max_evaluations, objective);
  result.generation_best = opt.generation_best();
  return result;
}

SearchResult bayes_opt_run(const BoConfig& config, const PolicySpace& space, const Objective& objective,
                           std::uint64_t seed) {
  BayesOpt opt(config, space, seed);
  return drive(opt, config.n_calls, objective);
}

}  // namespace mctl
