#include "mctl/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mctl {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  if (train_episodes < 1) throw ConfigError("at least one training episode is required");
  if (train_episodes >= episodes) throw ConfigError("train episodes must be fewer than total episodes");
  if (!compatible(algorithm, formulation)) {
    throw ConfigError("algorithm '" + std::string(to_string(algorithm)) + "' is incompatible with the '" +
                      std::string(to_string(formulation)) +
                      "' formulation; black-box baselines and bandits are not applicable to MDPs because they "
                      "do not use state information");
  }
  try {
    env.validate();
    hp.ga.validate();
    hp.bo.validate();
    DiscreteActionSet check(hp.grid_size);
    (void)check;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

SeedPair derive_seeds(std::uint64_t base_seed, int repeat) {
  const std::uint64_t s = base_seed + static_cast<std::uint64_t>(repeat);
  std::seed_seq seq{static_cast<std::uint32_t>(s & 0xffffffffu), static_cast<std::uint32_t>(s >> 32)};
  std::array<std::uint32_t, 4> words{};
  seq.generate(words.begin(), words.end());
  const auto join = [](std::uint32_t hi, std::uint32_t lo) {
    return (static_cast<std::uint64_t>(hi) << 32) | static_cast<std::uint64_t>(lo);
  };
  return SeedPair{join(words[0], words[1]), join(words[2], words[3])};
}

RunResult run_repeat(const ExperimentConfig& config, int repeat) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const SeedPair seeds = derive_seeds(config.seed, repeat);

  SurrogateEnv env(config.env, seeds.env);
  auto agent = make_agent(config.algorithm, config.formulation, config.hp, seeds.learner);

  RunResult run;
  run.repeat = repeat;
  run.seed = config.seed + static_cast<std::uint64_t>(repeat);
  run.train_rewards.reserve(static_cast<std::size_t>(config.train_episodes));
  for (int episode = 1; episode <= config.train_episodes; ++episode) {
    agent->begin_episode(episode);
    const EpisodeTrace trace = env.run_episode([&agent](int year) { return agent->act(year); });
    agent->learn(trace);
    run.train_rewards.push_back(trace.episodic_reward);
  }

  const Agent& frozen = *agent;
  for (int episode = config.train_episodes + 1; episode <= config.episodes; ++episode) {
    const EpisodeTrace trace = env.run_episode([&frozen](int year) { return frozen.greedy_action(year); });
    run.eval_rewards.push_back(trace.episodic_reward);
  }
  run.eval_reward = std::accumulate(run.eval_rewards.begin(), run.eval_rewards.end(), 0.0) /
                    static_cast<double>(run.eval_rewards.size());
  for (int year = 1; year <= kYears; ++year) {
    run.greedy_actions[static_cast<std::size_t>(year - 1)] = frozen.greedy_action(year);
  }
  run.learned_state = frozen.state();
  run.env_steps = env.steps_taken();
  run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result{config, {}};
  result.runs.reserve(static_cast<std::size_t>(config.repeats));
  for (int r = 0; r < config.repeats; ++r) result.runs.push_back(run_repeat(config, r));
  return result;
}

std::vector<std::pair<Algorithm, Formulation>> sweep_matrix() {
  std::vector<std::pair<Algorithm, Formulation>> out;
  for (Formulation f : {Formulation::kContextFree, Formulation::kContextual, Formulation::kMdp}) {
    for (Algorithm a : all_algorithms()) {
      if (compatible(a, f)) out.emplace_back(a, f);
    }
  }
  return out;
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::string results_csv(const std::vector<ExperimentResult>& results) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& exp : results) {
    const std::string prefix =
        std::string(to_string(exp.config.algorithm)) + ',' + std::string(to_string(exp.config.formulation)) + ',';
    for (const auto& run : exp.runs) {
      int episode = 1;
      for (double r : run.train_rewards) {
        out << prefix << run.repeat << ',' << episode++ << ',' << format_double(r) << ",train\n";
      }
      for (double r : run.eval_rewards) {
        out << prefix << run.repeat << ',' << episode++ << ',' << format_double(r) << ",eval\n";
      }
    }
  }
  return out.str();
}

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

json actions_json(const std::array<Action, kYears>& actions) {
  json out = json::array();
  for (const auto& a : actions) out.push_back({a.itn, a.irs});
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

json summary_json(const std::vector<ExperimentResult>& results) {
  json experiments = json::array();
  for (const auto& exp : results) {
    std::vector<double> evals;
    std::vector<double> wall;
    std::vector<std::int64_t> steps;
    for (const auto& run : exp.runs) {
      evals.insert(evals.end(), run.eval_rewards.begin(), run.eval_rewards.end());
      wall.push_back(run.wall_seconds);
      steps.push_back(run.env_steps);
    }
    experiments.push_back({{"algo", to_string(exp.config.algorithm)},
                           {"formulation", to_string(exp.config.formulation)},
                           {"repeats", exp.runs.size()},
                           {"eval_mean", mean_of(evals)},
                           {"eval_sd", sd_of(evals)},
                           {"eval_rewards", evals},
                           {"env_steps", steps},
                           {"wall_seconds", wall},
                           {"base_seed", exp.config.seed}});
  }
  return json{{"experiments", experiments}};
}

json policy_artifact(const ExperimentResult& experiment, const RunResult& run) {
  const DiscreteActionSet grid(experiment.config.hp.grid_size);
  std::vector<int> indices;
  for (const auto& a : run.greedy_actions) indices.push_back(grid.index(a));
  return json{{"algo", to_string(experiment.config.algorithm)},
              {"formulation", to_string(experiment.config.formulation)},
              {"repeat", run.repeat},
              {"seed", run.seed},
              {"grid_size", experiment.config.hp.grid_size},
              {"greedy_actions", actions_json(run.greedy_actions)},
              {"greedy_action_indices", indices},
              {"eval_reward", run.eval_reward},
              {"state", run.learned_state}};
}

void write_results(const std::vector<ExperimentResult>& results, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "results.csv", results_csv(results));
  write_text(dir / "summary.json", summary_json(results).dump(2) + "\n");
  for (const auto& exp : results) {
    const auto group = dir / (std::string(to_string(exp.config.algorithm)) + "_" +
                              std::string(to_string(exp.config.formulation)));
    for (const auto& run : exp.runs) {
      const auto run_dir = group / ("repeat_" + std::to_string(run.repeat));
      std::filesystem::create_directories(run_dir, ec);
      if (ec) throw std::runtime_error("cannot create " + run_dir.string() + ": " + ec.message());
      write_text(run_dir / "policy.json", policy_artifact(exp, run).dump(2) + "\n");
    }
  }
}

std::array<Action, kYears> policy_actions(const json& policy) {
  const auto& seq = policy.at("greedy_actions");
  if (!seq.is_array() || seq.size() != kYears) {
    throw std::invalid_argument("policy greedy_actions must list 5 [itn, irs] pairs");
  }
  std::array<Action, kYears> out{};
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = Action{seq[t].at(0).get<double>(), seq[t].at(1).get<double>()};
    if (!out[t].valid()) throw std::invalid_argument("policy action outside [0,1]^2");
  }
  return out;
}

double replay_policy(const json& policy, const SurrogateParams& params, std::uint64_t seed) {
  const auto actions = policy_actions(policy);
  SurrogateEnv env(params, seed);
  return env.run_episode([&actions](int year) { return actions[static_cast<std::size_t>(year - 1)]; })
      .episodic_reward;
}

}  // namespace mctl
