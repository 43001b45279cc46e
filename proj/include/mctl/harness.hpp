#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mctl/agents.hpp"
#include "mctl/env.hpp"

namespace mctl {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kUcb;
  Formulation formulation = Formulation::kContextFree;
  Hyperparameters hp;
  SurrogateParams env;
  int repeats = 20;
  int episodes = 400;
  int train_episodes = 399;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "results";

  /// Throws ConfigError on an invalid or incompatible configuration.
  void validate() const;
};

struct RunResult {
  int repeat = 0;
  std::uint64_t seed = 0;
  std::vector<double> train_rewards;
  std::vector<double> eval_rewards;
  double eval_reward = 0.0;
  double wall_seconds = 0.0;
  std::int64_t env_steps = 0;
  std::array<Action, kYears> greedy_actions{};
  nlohmann::json learned_state;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunResult> runs;
};

/// Independent streams for the environment and the learner of one repeat.
struct SeedPair {
  std::uint64_t env;
  std::uint64_t learner;
};
SeedPair derive_seeds(std::uint64_t base_seed, int repeat);

RunResult run_repeat(const ExperimentConfig& config, int repeat);
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Every (algorithm, formulation) pair reported in the comparison figures.
std::vector<std::pair<Algorithm, Formulation>> sweep_matrix();

inline constexpr const char* kCsvHeader = "algo,formulation,repeat,episode,reward,phase";

std::string results_csv(const std::vector<ExperimentResult>& results);
nlohmann::json summary_json(const std::vector<ExperimentResult>& results);
nlohmann::json policy_artifact(const ExperimentResult& experiment, const RunResult& run);

/// Writes results.csv, summary.json and <algo>_<formulation>/repeat_<r>/policy.json under `dir`.
void write_results(const std::vector<ExperimentResult>& results, const std::filesystem::path& dir);

/// Greedy action sequence stored in a policy artifact.
std::array<Action, kYears> policy_actions(const nlohmann::json& policy);
/// Runs one episode of the stored greedy sequence.
double replay_policy(const nlohmann::json& policy, const SurrogateParams& params, std::uint64_t seed);

/// Formats a double with the shortest representation that round-trips.
std::string format_double(double x);

}  // namespace mctl
