#include "mctl/agents.hpp"

#include <algorithm>
#include <stdexcept>

#include "mctl/gp.hpp"
#include "mctl/mdp.hpp"
#include "mctl/tabular.hpp"

namespace mctl {

namespace {

using nlohmann::json;

json to_json(const Eigen::Ref<const Eigen::VectorXd>& v) { return std::vector<double>(v.begin(), v.end()); }
json to_json(const Eigen::Ref<const Eigen::VectorXi>& v) { return std::vector<int>(v.begin(), v.end()); }

template <typename M>
json rows_to_json(const M& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<typename M::Scalar>(m.row(r).begin(), m.row(r).end()));
  }
  return rows;
}

json to_json(const PolicyVector& x) {
  return json{{"encoding", x.encoding == Encoding::kDiscrete ? "discrete" : "continuous"},
              {"values", to_json(x.values)}};
}

std::size_t slot(int year) { return static_cast<std::size_t>(year - 1); }

/// Unit-square coordinates of all grid actions, one column per index.
Eigen::MatrixXd grid_points(const DiscreteActionSet& grid) {
  Eigen::MatrixXd pts(2, grid.size());
  for (int j = 0; j < grid.size(); ++j) {
    const Action a = grid.action(j);
    pts(0, j) = a.itn;
    pts(1, j) = a.irs;
  }
  return pts;
}

gp::BetaSchedule<double> beta_schedule(const Hyperparameters& hp) {
  if (hp.gp_beta_schedule == "time_varying") return gp::BetaSchedule<double>::time_varying(hp.gp_delta, 2.0);
  if (hp.gp_beta_schedule == "fixed") return gp::BetaSchedule<double>::fixed(hp.gp_beta);
  throw std::invalid_argument("gp_beta_schedule must be 'fixed' or 'time_varying'");
}

// ---------------------------------------------------------------------------

class ContextFreeValueAgent final : public Agent {
 public:
  ContextFreeValueAgent(bool use_ucb, const Hyperparameters& hp, std::uint64_t seed)
      : grid_(hp.grid_size),
        table_(grid_.size(), hp.alpha),
        use_ucb_(use_ucb),
        c_(hp.ucb_c),
        eps_{hp.epsilon_start, hp.epsilon_end, hp.epsilon_decay_episodes},
        rng_(seed) {}

  void begin_episode(int episode) override {
    chosen_ = use_ucb_ ? select_ucb(table_, episode, c_) : select_epsilon_greedy(table_, eps_.at(episode), rng_);
  }
  Action act(int) override { return grid_.action(chosen_); }
  void learn(const EpisodeTrace& trace) override { q_update(table_, chosen_, trace.episodic_reward); }
  Action greedy_action(int) const override { return grid_.action(argmax_lowest(table_.q)); }
  json state() const override { return {{"q", to_json(table_.q)}, {"n", to_json(table_.n)}}; }

 private:
  DiscreteActionSet grid_;
  ValueTable table_;
  bool use_ucb_;
  double c_;
  EpsilonSchedule eps_;
  Rng rng_;
  int chosen_ = 0;
};

class ContextualValueAgent final : public Agent {
 public:
  ContextualValueAgent(bool use_ucb, const Hyperparameters& hp, std::uint64_t seed)
      : grid_(hp.grid_size),
        table_(grid_.size(), hp.alpha),
        use_ucb_(use_ucb),
        c_(hp.ucb_c),
        eps_{hp.epsilon_start, hp.epsilon_end, hp.epsilon_decay_episodes},
        rng_(seed) {}

  void begin_episode(int episode) override { episode_ = episode; }
  Action act(int year) override {
    const Eigen::VectorXd q = table_.q.row(year - 1).transpose();
    const Eigen::VectorXi n = table_.n.row(year - 1).transpose();
    const int a = use_ucb_ ? select_ucb(q, n, episode_, c_) : select_epsilon_greedy(q, eps_.at(episode_), rng_);
    return grid_.action(a);
  }
  void learn(const EpisodeTrace& trace) override {
    for (const auto& obs : contextual_observations(trace)) {
      contextual_update(table_, obs.year, grid_.index(obs.action), obs.reward);
    }
  }
  Action greedy_action(int year) const override {
    return grid_.action(argmax_lowest(table_.q.row(year - 1).transpose()));
  }
  json state() const override { return {{"q", rows_to_json(table_.q)}, {"n", rows_to_json(table_.n)}}; }

 private:
  DiscreteActionSet grid_;
  ContextualValueTable table_;
  bool use_ucb_;
  double c_;
  EpsilonSchedule eps_;
  Rng rng_;
  int episode_ = 1;
};

class MdpValueAgent final : public Agent {
 public:
  MdpValueAgent(bool use_ucb, const Hyperparameters& hp, std::uint64_t seed)
      : grid_(hp.grid_size),
        table_(grid_.size(), hp.alpha, hp.discount),
        use_ucb_(use_ucb),
        c_(hp.ucb_c),
        eps_{hp.epsilon_start, hp.epsilon_end, hp.epsilon_decay_episodes},
        rng_(seed) {}

  void begin_episode(int episode) override { episode_ = episode; }
  Action act(int year) override {
    const int a = use_ucb_ ? select_td_cucb(table_, year, episode_, c_)
                           : select_epsilon_greedy(table_.q.row(year - 1).transpose(), eps_.at(episode_), rng_);
    return grid_.action(a);
  }
  void learn(const EpisodeTrace& trace) override {
    for (const auto& tr : mdp_transitions(trace)) {
      q_learning_update(table_, tr.state, grid_.index(tr.action), tr.reward, tr.next_state, tr.terminal);
    }
  }
  Action greedy_action(int year) const override {
    return grid_.action(argmax_lowest(table_.q.row(year - 1).transpose()));
  }
  json state() const override { return {{"q", rows_to_json(table_.q)}, {"n", rows_to_json(table_.n)}}; }

 private:
  DiscreteActionSet grid_;
  QTable table_;
  bool use_ucb_;
  double c_;
  EpsilonSchedule eps_;
  Rng rng_;
  int episode_ = 1;
};

class GradientBanditAgent final : public Agent {
 public:
  GradientBanditAgent(bool contextual, const Hyperparameters& hp, std::uint64_t seed)
      : grid_(hp.grid_size), contextual_(contextual), lr_(hp.pg_bandit_lr), rng_(seed) {
    tables_.assign(contextual ? kYears : 1, PreferenceTable(grid_.size()));
  }

  void begin_episode(int) override { chosen_.fill(-1); }
  Action act(int year) override {
    const std::size_t k = table_slot(year);
    if (chosen_[k] < 0) chosen_[k] = sample_categorical(tables_[k].policy(), rng_);
    return grid_.action(chosen_[k]);
  }
  void learn(const EpisodeTrace& trace) override {
    if (!contextual_) {
      gradient_bandit_step(tables_[0], chosen_[0], trace.episodic_reward, lr_);
      return;
    }
    for (const auto& obs : contextual_observations(trace)) {
      gradient_bandit_step(tables_[slot(obs.year)], grid_.index(obs.action), obs.reward, lr_);
    }
  }
  Action greedy_action(int year) const override {
    return grid_.action(argmax_lowest(tables_[table_slot(year)].h));
  }
  json state() const override {
    json out = json::array();
    for (const auto& t : tables_) {
      out.push_back({{"h", to_json(t.h)}, {"baseline", t.baseline}, {"count", t.count}});
    }
    return {{"preferences", out}};
  }

 private:
  std::size_t table_slot(int year) const { return contextual_ ? slot(year) : 0; }

  DiscreteActionSet grid_;
  bool contextual_;
  double lr_;
  Rng rng_;
  std::vector<PreferenceTable> tables_;
  std::array<int, kYears> chosen_{-1, -1, -1, -1, -1};
};

class ReinforceAgent final : public Agent {
 public:
  ReinforceAgent(const Hyperparameters& hp, std::uint64_t seed)
      : grid_(hp.grid_size), net_(grid_.size(), hp.pg_hidden, hp.pg_mdp_lr), discount_(hp.discount), rng_(seed) {
    net_.initialize(rng_, hp.pg_init_scale);
  }

  void begin_episode(int) override {}
  Action act(int year) override { return grid_.action(sample_categorical(net_.forward(year), rng_)); }
  void learn(const EpisodeTrace& trace) override { reinforce_update(net_, trace, tracker_, discount_, grid_); }
  Action greedy_action(int year) const override { return grid_.action(argmax_lowest(net_.forward(year))); }
  json state() const override {
    return {{"hidden", net_.hidden()},
            {"input_weights", rows_to_json(net_.input_weights())},
            {"hidden_bias", to_json(net_.hidden_bias())},
            {"output_weights", rows_to_json(net_.output_weights())},
            {"output_bias", to_json(net_.output_bias())},
            {"return_mean", tracker_.mean()},
            {"return_sd", tracker_.sd()},
            {"return_count", tracker_.count()}};
  }

 private:
  DiscreteActionSet grid_;
  PolicyNetwork net_;
  ReturnTracker tracker_;
  double discount_;
  Rng rng_;
};

/// Shared GP bookkeeping: observation buffer, target standardization and
/// refitting on the most recent `max_points` observations.
class GpBuffer {
 public:
  GpBuffer(gp::Kernel<double> kernel, double noise, int max_points)
      : model_(kernel, noise), max_points_(max_points) {}

  void add(const Eigen::VectorXd& x, double y) {
    xs_.push_back(x);
    ys_.push_back(y);
  }

  void refit() {
    const std::size_t n = std::min(xs_.size(), static_cast<std::size_t>(max_points_));
    const std::size_t first = xs_.size() - n;
    Eigen::MatrixXd x(xs_.empty() ? 0 : xs_.front().size(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      x.col(static_cast<Eigen::Index>(i)) = xs_[first + i];
      y[static_cast<Eigen::Index>(i)] = ys_[first + i];
    }
    scaler_ = gp::TargetScaler<double>::fit(
        Eigen::Map<const Eigen::VectorXd>(ys_.data(), static_cast<Eigen::Index>(ys_.size())));
    model_.fit(x, scaler_.forward(y));
  }

  const gp::GpModel<double>& model() const { return model_; }
  const gp::TargetScaler<double>& scaler() const { return scaler_; }

  json state() const {
    json xs = json::array();
    for (const auto& x : xs_) xs.push_back(to_json(x));
    return {{"inputs", xs}, {"targets", ys_}, {"target_offset", scaler_.offset}, {"target_scale", scaler_.scale}};
  }

 private:
  gp::GpModel<double> model_;
  gp::TargetScaler<double> scaler_;
  int max_points_;
  std::vector<Eigen::VectorXd> xs_;
  std::vector<double> ys_;
};

class GpUcbAgent final : public Agent {
 public:
  explicit GpUcbAgent(const Hyperparameters& hp)
      : grid_(hp.grid_size),
        candidates_(grid_points(grid_)),
        buffer_(gp::Kernel<double>::matern52(hp.gp_variance, hp.gp_length_scale), hp.gp_noise, hp.gp_max_points),
        beta_(beta_schedule(hp)),
        refit_every_(std::max(hp.gp_refit_every, 1)) {}

  void begin_episode(int episode) override {
    chosen_ = gp::gp_ucb_select<double>(buffer_.model(), candidates_, beta_.at(episode).beta);
  }
  Action act(int) override { return grid_.action(chosen_); }
  void learn(const EpisodeTrace& trace) override {
    buffer_.add(candidates_.col(chosen_), trace.episodic_reward);
    if (++episodes_ % refit_every_ == 0) buffer_.refit();
  }
  Action greedy_action(int) const override {
    return grid_.action(argmax_lowest(buffer_.model().predict_mean(candidates_)));
  }
  json state() const override { return {{"gp", buffer_.state()}}; }

 private:
  DiscreteActionSet grid_;
  Eigen::MatrixXd candidates_;
  GpBuffer buffer_;
  gp::BetaSchedule<double> beta_;
  int refit_every_;
  int episodes_ = 0;
  int chosen_ = 0;
};

class CgpUcbAgent final : public Agent {
 public:
  explicit CgpUcbAgent(const Hyperparameters& hp)
      : grid_(hp.grid_size),
        candidates_(grid_points(grid_)),
        buffer_(gp::Kernel<double>::product({gp::Family::kRbf, hp.gp_rbf_variance, hp.gp_rbf_length_scale},
                                            {gp::Family::kMatern52, hp.gp_variance, hp.gp_length_scale}, 1),
                hp.gp_noise, hp.gp_max_points),
        beta_(beta_schedule(hp)),
        refit_every_(std::max(hp.cgp_refit_every, 1)) {}

  static Eigen::VectorXd context(int year) {
    return Eigen::VectorXd::Constant(1, static_cast<double>(year - 1) / static_cast<double>(kYears - 1));
  }

  void begin_episode(int episode) override { episode_ = episode; }
  Action act(int year) override {
    return grid_.action(gp::cgp_ucb_select<double>(buffer_.model(), context(year), candidates_, beta_.at(episode_).beta));
  }
  void learn(const EpisodeTrace& trace) override {
    for (const auto& obs : contextual_observations(trace)) {
      Eigen::VectorXd x(3);
      x << context(obs.year), obs.action.itn, obs.action.irs;
      buffer_.add(x, obs.reward);
    }
    if (++episodes_ % refit_every_ == 0) buffer_.refit();
  }
  Action greedy_action(int year) const override {
    const Eigen::MatrixXd pts = gp::with_context<double>(context(year), candidates_);
    return grid_.action(argmax_lowest(buffer_.model().predict_mean(pts)));
  }
  json state() const override { return {{"gp", buffer_.state()}}; }

 private:
  DiscreteActionSet grid_;
  Eigen::MatrixXd candidates_;
  GpBuffer buffer_;
  gp::BetaSchedule<double> beta_;
  int refit_every_;
  int episodes_ = 0;
  int episode_ = 1;
};

/// Drives an ask/tell optimizer one policy per episode; once the optimizer
/// stops proposing, the best policy found is replayed.
class BlackBoxAgent final : public Agent {
 public:
  explicit BlackBoxAgent(std::unique_ptr<BlackBoxOptimizer> opt) : opt_(std::move(opt)) {}

  void begin_episode(int) override {
    asked_ = !opt_->finished();
    current_ = opt_->space().decode(asked_ ? opt_->ask() : opt_->best());
  }
  Action act(int year) override { return current_[slot(year)]; }
  void learn(const EpisodeTrace& trace) override {
    if (asked_) opt_->tell(trace.episodic_reward);
  }
  Action greedy_action(int year) const override { return opt_->space().decode(opt_->best())[slot(year)]; }
  json state() const override {
    json out{{"best", to_json(opt_->best())}, {"best_reward", opt_->best_reward()}, {"evaluations", opt_->evaluations()}};
    if (const auto* ga = dynamic_cast<const GeneticAlgorithm*>(opt_.get())) {
      out["generation_best"] = ga->generation_best();
    }
    if (const auto* bo = dynamic_cast<const BayesOpt*>(opt_.get())) {
      out["hedge_gains"] = bo->hedge().gains;
      out["fallbacks"] = bo->fallback_count();
    }
    return out;
  }

 private:
  std::unique_ptr<BlackBoxOptimizer> opt_;
  std::array<Action, kYears> current_{};
  bool asked_ = false;
};

struct AlgorithmInfo {
  Algorithm id;
  std::string_view name;
};

constexpr std::array<AlgorithmInfo, 13> kAlgorithms{{
    {Algorithm::kEpsilonGreedy, "epsilon_greedy"},
    {Algorithm::kUcb, "ucb"},
    {Algorithm::kGradientBandit, "gradient_bandit"},
    {Algorithm::kGpUcb, "gp_ucb"},
    {Algorithm::kCgpUcb, "cgp_ucb"},
    {Algorithm::kQLearning, "q_learning"},
    {Algorithm::kTdCucb, "td_cucb"},
    {Algorithm::kReinforce, "reinforce"},
    {Algorithm::kRandom, "random"},
    {Algorithm::kGa, "ga"},
    {Algorithm::kGaDiscrete, "ga_discrete"},
    {Algorithm::kBo, "bo"},
    {Algorithm::kBoDiscrete, "bo_discrete"},
}};

}  // namespace

std::string_view to_string(Algorithm a) {
  for (const auto& info : kAlgorithms) {
    if (info.id == a) return info.name;
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& info : kAlgorithms) {
    if (info.name == name) return info.id;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> all = [] {
    std::vector<Algorithm> v;
    for (const auto& info : kAlgorithms) v.push_back(info.id);
    return v;
  }();
  return all;
}

bool compatible(Algorithm a, Formulation f) {
  switch (a) {
    case Algorithm::kEpsilonGreedy:
    case Algorithm::kUcb:
    case Algorithm::kGradientBandit:
    case Algorithm::kRandom:
    case Algorithm::kGa:
    case Algorithm::kGaDiscrete:
    case Algorithm::kBo:
    case Algorithm::kBoDiscrete:
      return f != Formulation::kMdp;
    case Algorithm::kGpUcb:
      return f == Formulation::kContextFree;
    case Algorithm::kCgpUcb:
      return f == Formulation::kContextual;
    case Algorithm::kQLearning:
    case Algorithm::kTdCucb:
    case Algorithm::kReinforce:
      return f == Formulation::kMdp;
  }
  return false;
}

std::unique_ptr<Agent> make_agent(Algorithm algorithm, Formulation formulation, const Hyperparameters& hp,
                                  std::uint64_t seed) {
  if (!compatible(algorithm, formulation)) {
    std::string msg = "algorithm '" + std::string(to_string(algorithm)) + "' is not defined for the '" +
                      std::string(to_string(formulation)) + "' formulation";
    if (formulation == Formulation::kMdp) msg += " (black-box and bandit methods do not use state information)";
    throw std::invalid_argument(msg);
  }
  const bool contextual = formulation == Formulation::kContextual;
  const int slots = contextual ? kYears : 1;
  const DiscreteActionSet grid(hp.grid_size);
  switch (algorithm) {
    case Algorithm::kEpsilonGreedy:
    case Algorithm::kUcb: {
      const bool ucb = algorithm == Algorithm::kUcb;
      if (contextual) return std::make_unique<ContextualValueAgent>(ucb, hp, seed);
      return std::make_unique<ContextFreeValueAgent>(ucb, hp, seed);
    }
    case Algorithm::kGradientBandit:
      return std::make_unique<GradientBanditAgent>(contextual, hp, seed);
    case Algorithm::kGpUcb:
      return std::make_unique<GpUcbAgent>(hp);
    case Algorithm::kCgpUcb:
      return std::make_unique<CgpUcbAgent>(hp);
    case Algorithm::kQLearning:
      return std::make_unique<MdpValueAgent>(false, hp, seed);
    case Algorithm::kTdCucb:
      return std::make_unique<MdpValueAgent>(true, hp, seed);
    case Algorithm::kReinforce:
      return std::make_unique<ReinforceAgent>(hp, seed);
    case Algorithm::kRandom:
      return std::make_unique<BlackBoxAgent>(
          std::make_unique<RandomSearch>(PolicySpace(Encoding::kContinuous, slots, grid), seed));
    case Algorithm::kGa:
    case Algorithm::kGaDiscrete: {
      const auto enc = algorithm == Algorithm::kGa ? Encoding::kContinuous : Encoding::kDiscrete;
      return std::make_unique<BlackBoxAgent>(
          std::make_unique<GeneticAlgorithm>(hp.ga, PolicySpace(enc, slots, grid), seed));
    }
    case Algorithm::kBo:
    case Algorithm::kBoDiscrete: {
      const auto enc = algorithm == Algorithm::kBo ? Encoding::kContinuous : Encoding::kDiscrete;
      return std::make_unique<BlackBoxAgent>(
          std::make_unique<BayesOpt>(hp.bo, PolicySpace(enc, slots, grid), seed));
    }
  }
  throw std::logic_error("unhandled algorithm");
}

}  // namespace mctl
