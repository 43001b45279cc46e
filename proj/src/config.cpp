#include "mctl/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <yaml-cpp/yaml.h>

namespace mctl {

namespace {

struct Entry {
  std::string key;
  std::function<void(ExperimentConfig&, const YAML::Node&)> load;
  std::function<void(ExperimentConfig&, YAML::Emitter&)> dump;
};

template <typename T, typename Get>
Entry field(std::string key, Get get) {
  return Entry{key, [get](ExperimentConfig& c, const YAML::Node& n) { get(c) = n.as<T>(); },
               [get, key](ExperimentConfig& c, YAML::Emitter& e) { e << YAML::Key << key << YAML::Value << get(c); }};
}

const std::vector<Entry>& entries() {
  using C = ExperimentConfig;
  static const std::vector<Entry> table = {
      Entry{"algo", [](C& c, const YAML::Node& n) { c.algorithm = parse_algorithm(n.as<std::string>()); },
            [](C& c, YAML::Emitter& e) { e << YAML::Key << "algo" << YAML::Value << std::string(to_string(c.algorithm)); }},
      Entry{"formulation", [](C& c, const YAML::Node& n) { c.formulation = parse_formulation(n.as<std::string>()); },
            [](C& c, YAML::Emitter& e) {
              e << YAML::Key << "formulation" << YAML::Value << std::string(to_string(c.formulation));
            }},
      field<int>("repeats", [](C& c) -> int& { return c.repeats; }),
      field<int>("episodes", [](C& c) -> int& { return c.episodes; }),
      field<int>("train_episodes", [](C& c) -> int& { return c.train_episodes; }),
      field<std::uint64_t>("seed", [](C& c) -> std::uint64_t& { return c.seed; }),
      Entry{"out", [](C& c, const YAML::Node& n) { c.output_dir = n.as<std::string>(); },
            [](C& c, YAML::Emitter& e) { e << YAML::Key << "out" << YAML::Value << c.output_dir.string(); }},

      field<int>("grid_size", [](C& c) -> int& { return c.hp.grid_size; }),
      field<double>("alpha", [](C& c) -> double& { return c.hp.alpha; }),
      field<double>("ucb_c", [](C& c) -> double& { return c.hp.ucb_c; }),
      field<double>("epsilon_start", [](C& c) -> double& { return c.hp.epsilon_start; }),
      field<double>("epsilon_end", [](C& c) -> double& { return c.hp.epsilon_end; }),
      field<int>("epsilon_decay_episodes", [](C& c) -> int& { return c.hp.epsilon_decay_episodes; }),
      field<double>("pg_bandit_lr", [](C& c) -> double& { return c.hp.pg_bandit_lr; }),
      field<double>("pg_mdp_lr", [](C& c) -> double& { return c.hp.pg_mdp_lr; }),
      field<int>("pg_hidden", [](C& c) -> int& { return c.hp.pg_hidden; }),
      field<double>("pg_init_scale", [](C& c) -> double& { return c.hp.pg_init_scale; }),
      field<double>("discount", [](C& c) -> double& { return c.hp.discount; }),
      field<std::string>("gp_beta_schedule", [](C& c) -> std::string& { return c.hp.gp_beta_schedule; }),
      field<double>("gp_beta", [](C& c) -> double& { return c.hp.gp_beta; }),
      field<double>("gp_delta", [](C& c) -> double& { return c.hp.gp_delta; }),
      field<double>("gp_variance", [](C& c) -> double& { return c.hp.gp_variance; }),
      field<double>("gp_length_scale", [](C& c) -> double& { return c.hp.gp_length_scale; }),
      field<double>("gp_rbf_variance", [](C& c) -> double& { return c.hp.gp_rbf_variance; }),
      field<double>("gp_rbf_length_scale", [](C& c) -> double& { return c.hp.gp_rbf_length_scale; }),
      field<double>("gp_noise", [](C& c) -> double& { return c.hp.gp_noise; }),
      field<int>("gp_refit_every", [](C& c) -> int& { return c.hp.gp_refit_every; }),
      field<int>("cgp_refit_every", [](C& c) -> int& { return c.hp.cgp_refit_every; }),
      field<int>("gp_max_points", [](C& c) -> int& { return c.hp.gp_max_points; }),

      field<int>("ga_max_iterations", [](C& c) -> int& { return c.hp.ga.max_iterations; }),
      field<int>("ga_population", [](C& c) -> int& { return c.hp.ga.population; }),
      field<double>("ga_mutation_prob", [](C& c) -> double& { return c.hp.ga.mutation_prob; }),
      field<double>("ga_elite_ratio", [](C& c) -> double& { return c.hp.ga.elite_ratio; }),
      field<double>("ga_crossover_prob", [](C& c) -> double& { return c.hp.ga.crossover_prob; }),
      field<double>("ga_parents_portion", [](C& c) -> double& { return c.hp.ga.parents_portion; }),
      field<int>("ga_max_evaluations", [](C& c) -> int& { return c.hp.ga.max_evaluations; }),

      field<int>("bo_n_calls", [](C& c) -> int& { return c.hp.bo.n_calls; }),
      field<int>("bo_n_initial_points", [](C& c) -> int& { return c.hp.bo.n_initial_points; }),
      field<double>("bo_kappa", [](C& c) -> double& { return c.hp.bo.kappa; }),
      field<int>("bo_n_points", [](C& c) -> int& { return c.hp.bo.n_points; }),
      field<double>("bo_eta", [](C& c) -> double& { return c.hp.bo.eta; }),
      field<double>("bo_noise_variance", [](C& c) -> double& { return c.hp.bo.noise_variance; }),
      field<double>("bo_signal_variance", [](C& c) -> double& { return c.hp.bo.signal_variance; }),
      field<double>("bo_length_scale", [](C& c) -> double& { return c.hp.bo.length_scale; }),
      field<int>("bo_max_points", [](C& c) -> int& { return c.hp.bo.max_points; }),

      Entry{"year_weights",
            [](C& c, const YAML::Node& n) {
              const auto w = n.as<std::vector<double>>();
              if (w.size() != kYears) throw ConfigError("year_weights needs exactly 5 values");
              std::copy(w.begin(), w.end(), c.env.year_weights.begin());
            },
            [](C& c, YAML::Emitter& e) {
              e << YAML::Key << "year_weights" << YAML::Value << YAML::Flow
                << std::vector<double>(c.env.year_weights.begin(), c.env.year_weights.end());
            }},
      field<double>("resistance_decay", [](C& c) -> double& { return c.env.resistance_decay; }),
      field<double>("resistance_gain", [](C& c) -> double& { return c.env.resistance_gain; }),
      field<double>("resistance_penalty", [](C& c) -> double& { return c.env.resistance_penalty; }),
      field<double>("interaction", [](C& c) -> double& { return c.env.interaction; }),
      field<double>("benefit_scale", [](C& c) -> double& { return c.env.benefit_scale; }),
      field<double>("cost_scale", [](C& c) -> double& { return c.env.cost_scale; }),
      field<double>("noise_sd", [](C& c) -> double& { return c.env.noise_sd; }),
      field<bool>("noise_enabled", [](C& c) -> bool& { return c.env.noise_enabled; }),
  };
  return table;
}

}  // namespace

void apply_config_text(const std::string& text, ExperimentConfig& config) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (root.IsNull()) return;
  if (!root.IsMap()) throw ConfigError("config must be a flat key: value mapping");

  bool saw_episodes = false;
  bool saw_train = false;
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const auto it = std::find_if(entries().begin(), entries().end(), [&](const Entry& e) { return e.key == key; });
    if (it == entries().end()) throw ConfigError("unknown config key '" + key + "'");
    try {
      it->load(config, kv.second);
    } catch (const YAML::Exception& e) {
      throw ConfigError("bad value for '" + key + "': " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("bad value for '" + key + "': " + e.what());
    }
    saw_episodes |= key == "episodes";
    saw_train |= key == "train_episodes";
  }
  if (saw_episodes && !saw_train) config.train_episodes = config.episodes - 1;
}

void apply_config_file(const std::filesystem::path& path, ExperimentConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    apply_config_text(buf.str(), config);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_config(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  for (const auto& e : entries()) e.dump(copy, out);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace mctl
