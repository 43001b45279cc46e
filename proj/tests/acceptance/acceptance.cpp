// Acceptance suite. Prints one [PASS]/[FAIL] line per check and exits nonzero
// if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cli.hpp"
#include "mctl/agents.hpp"
#include "mctl/blackbox.hpp"
#include "mctl/gp.hpp"
#include "mctl/harness.hpp"
#include "mctl/mdp.hpp"
#include "mctl/tabular.hpp"

using namespace mctl;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) detail << "first failure: " << why << "; ";
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

std::vector<double> eval_rewards(const ExperimentResult& r) {
  std::vector<double> out;
  for (const auto& run : r.runs) out.push_back(run.eval_reward);
  return out;
}

ExperimentConfig default_config(Algorithm a, Formulation f) {
  ExperimentConfig c;
  c.algorithm = a;
  c.formulation = f;
  return c;
}

// ---------------------------------------------------------------------------

Verdict ucb_episode_121() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto cfg = default_config(Algorithm::kUcb, Formulation::kContextFree);
  const DiscreteActionSet grid(cfg.hp.grid_size);
  int improved = 0;
  for (int r = 0; r < cfg.repeats; ++r) {
    const auto seeds = derive_seeds(cfg.seed, r);
    SurrogateEnv env(cfg.env, seeds.env);
    auto agent = make_agent(cfg.algorithm, cfg.formulation, cfg.hp, seeds.learner);
    std::vector<int> visits(static_cast<std::size_t>(grid.size()), 0);
    std::vector<double> rewards;
    for (int e = 1; e <= 160; ++e) {
      agent->begin_episode(e);
      const auto trace = env.run_episode([&](int y) { return agent->act(y); });
      agent->learn(trace);
      rewards.push_back(trace.episodic_reward);
      if (e <= 121) {
        const int j = grid.index(trace.steps[0].action);
        ++visits[static_cast<std::size_t>(j)];
        v.require(j == e - 1, "episode " + std::to_string(e) + " chose index " + std::to_string(j));
      }
    }
    v.require(std::all_of(visits.begin(), visits.end(), [](int n) { return n == 1; }),
              "visit counts after 121 episodes are not all exactly 1");

    // the harness must follow the same trajectory
    const auto run = run_repeat(cfg, r);
    v.require(std::equal(rewards.begin(), rewards.end(), run.train_rewards.begin()),
              "harness trajectory differs from the direct loop");

    const double early = std::accumulate(rewards.begin(), rewards.begin() + 121, 0.0) / 121.0;
    const double late = std::accumulate(rewards.begin() + 121, rewards.end(), 0.0) / 39.0;
    improved += late > early;
    v.require(late > early, "repeat " + std::to_string(r) + ": mean(122..160) " + std::to_string(late) +
                                " <= mean(1..121) " + std::to_string(early));
  }
  const double secs = seconds_since(t0);
  v.require(secs < 10.0, "runtime " + std::to_string(secs) + " s");
  v.detail << improved << "/20 repeats improve after episode 121; " << secs << " s";
  return v;
}

Verdict gp_dense_oracle() {
  Verdict v;
  const auto t0 = Clock::now();
  Rng rng(424242);
  std::uniform_int_distribution<int> size(1, 30);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst_mean = 0.0, worst_var = 0.0;
  for (int ds = 0; ds < 20; ++ds) {
    const int n = size(rng);
    Eigen::MatrixXd x(2, n);
    for (auto& e : x.reshaped()) e = u(rng);
    Eigen::VectorXd y(n);
    for (auto& e : y) e = g(rng);
    const double noise = 0.1;
    gp::GpModel<double> model(gp::Kernel<double>::matern52(), noise);
    model.fit(x, y);

    auto k = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      const double r = std::sqrt(5.0) * (a - b).norm();
      return (1.0 + r + r * r / 3.0) * std::exp(-r);
    };
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) K(i, j) = k(x.col(i), x.col(j));
    }
    K.diagonal().array() += noise + model.jitter();
    const Eigen::MatrixXd Kinv = K.fullPivLu().inverse();

    Eigen::MatrixXd q(2, 25);
    for (auto& e : q.reshaped()) e = u(rng);
    Eigen::VectorXd mu, var;
    model.predict(q, mu, var);
    for (int c = 0; c < q.cols(); ++c) {
      Eigen::VectorXd ks(n);
      for (int i = 0; i < n; ++i) ks[i] = k(x.col(i), q.col(c));
      const double m_ref = ks.dot(Kinv * y);
      const double v_ref = std::max(0.0, 1.0 - ks.dot(Kinv * ks));
      worst_mean = std::max(worst_mean, std::abs(mu[c] - m_ref));
      worst_var = std::max(worst_var, std::abs(var[c] - v_ref));
    }
  }
  const double secs = seconds_since(t0);
  v.require(worst_mean <= 1e-8, "mean error " + std::to_string(worst_mean));
  v.require(worst_var <= 1e-8, "variance error " + std::to_string(worst_var));
  v.require(secs < 5.0, "runtime " + std::to_string(secs) + " s");
  v.detail << "max |dmean| " << worst_mean << ", max |dvar| " << worst_var << "; " << secs << " s";
  return v;
}

Verdict gradient_check() {
  Verdict v;
  const auto t0 = Clock::now();
  PolicyNetwork net(121, 10, 0.001);
  Rng rng(1357);
  std::uniform_int_distribution<int> year(1, 5), act(0, 120);
  std::normal_distribution<double> g(0.0, 0.5);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd theta(net.parameter_count());
    for (auto& e : theta) e = g(rng);
    net.set_parameters(theta);
    const int s = year(rng), a = act(rng);
    const Eigen::VectorXd analytic = net.grad_log_prob(s, a);
    Eigen::VectorXd numeric(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[i] += 1e-5;
      tm[i] -= 1e-5;
      net.set_parameters(tp);
      const double fp = net.log_prob(s, a);
      net.set_parameters(tm);
      const double fm = net.log_prob(s, a);
      numeric[i] = (fp - fm) / 2e-5;
    }
    const double rel = (analytic - numeric).norm() / std::max(analytic.norm(), numeric.norm());
    worst = std::max(worst, rel);
  }
  const double secs = seconds_since(t0);
  v.require(worst < 1e-4, "relative error " + std::to_string(worst));
  v.require(secs < 5.0, "runtime " + std::to_string(secs) + " s");
  v.detail << "max relative error " << worst << " over 20 triples; " << secs << " s";
  return v;
}

Verdict normalization() {
  Verdict v;
  Rng rng(9001);
  std::normal_distribution<double> g(0.0, 10.0);
  std::uniform_real_distribution<double> shift(-500.0, 500.0);
  double worst_sum = 0.0, worst_shift = 0.0;
  auto track = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    worst_sum = std::max({worst_sum, std::abs(p.sum() - 1.0), std::abs(q.sum() - 1.0)});
    worst_shift = std::max(worst_shift, (p - q).cwiseAbs().maxCoeff());
    v.require(p.minCoeff() >= 0.0, "negative probability");
  };
  PolicyNetwork net(121, 10, 0.001);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd h(121);
    for (auto& e : h) e = g(rng);
    const double c = shift(rng);
    track(softmax(h), softmax((h.array() + c).matrix()));

    Eigen::VectorXd theta(net.parameter_count());
    for (auto& e : theta) e = g(rng) * 0.1;
    net.set_parameters(theta);
    const int year = 1 + i % kYears;
    const Eigen::VectorXd p = net.forward(year);
    net.output_bias().array() += c;
    track(p, net.forward(year));

    HedgeState hs, hs2;
    hs.eta = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
    hs2.eta = hs.eta;
    for (int j = 0; j < HedgeState::kArms; ++j) {
      hs.gains[static_cast<std::size_t>(j)] = g(rng);
      hs2.gains[static_cast<std::size_t>(j)] = hs.gains[static_cast<std::size_t>(j)] + c;
    }
    const auto a = hs.probabilities(), b = hs2.probabilities();
    track(Eigen::Vector3d(a[0], a[1], a[2]), Eigen::Vector3d(b[0], b[1], b[2]));
  }
  v.require(worst_sum <= 1e-12, "sum deviation " + std::to_string(worst_sum));
  v.require(worst_shift <= 1e-12, "shift deviation " + std::to_string(worst_shift));
  v.detail << "max |sum-1| " << worst_sum << ", max shift change " << worst_shift << " (3 x 1000 inputs)";
  return v;
}

Verdict budget_and_determinism() {
  Verdict v;
  const auto t0 = Clock::now();
  auto sweep = [&]() {
    std::vector<ExperimentResult> all;
    for (const auto& [a, f] : sweep_matrix()) {
      auto cfg = default_config(a, f);
      cfg.repeats = 2;
      all.push_back(run_experiment(cfg));
      for (const auto& run : all.back().runs) {
        v.require(run.env_steps == 2000, std::string(to_string(a)) + "/" + std::string(to_string(f)) + " used " +
                                             std::to_string(run.env_steps) + " steps");
      }
    }
    return results_csv(all);
  };
  const std::string first = sweep();
  const std::string second = sweep();
  v.require(first == second, "results.csv differs between identical runs");
  v.detail << sweep_matrix().size() << " pairs x 2 repeats, csv " << first.size() << " bytes identical: "
           << (first == second ? "yes" : "no") << "; " << seconds_since(t0) << " s";
  return v;
}

Verdict ga_elitism() {
  Verdict v;
  int runs = 0;
  for (auto enc : {Encoding::kContinuous, Encoding::kDiscrete}) {
    for (int slots : {1, kYears}) {
      const PolicySpace space(enc, slots);
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SurrogateEnv env(SurrogateParams{}, seed);
        const auto res = ga_run(GaConfig{}, space, [&](const PolicyVector& x) {
          const auto acts = space.decode(x);
          return env.run_episode([&](int y) { return acts[static_cast<std::size_t>(y - 1)]; }).episodic_reward;
        }, 100 + seed);
        ++runs;
        v.require(res.generation_best.size() >= 2, "fewer than two generations");
        for (std::size_t gi = 1; gi < res.generation_best.size(); ++gi) {
          v.require(res.generation_best[gi] >= res.generation_best[gi - 1],
                    "generation best decreased in seed " + std::to_string(seed));
        }
      }
    }
  }
  v.detail << runs << " runs (continuous and discrete, 1 and 5 slots)";
  return v;
}

Verdict formulation_ordering() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto cf = eval_rewards(run_experiment(default_config(Algorithm::kUcb, Formulation::kContextFree)));
  const auto ctx = eval_rewards(run_experiment(default_config(Algorithm::kUcb, Formulation::kContextual)));
  const auto mdp = eval_rewards(run_experiment(default_config(Algorithm::kTdCucb, Formulation::kMdp)));
  const double pooled_hi = std::sqrt(0.5 * (sample_var(mdp) + sample_var(ctx)));
  const double pooled_lo = std::sqrt(0.5 * (sample_var(ctx) + sample_var(cf)));
  const double gap_hi = (mean(mdp) - mean(ctx)) / pooled_hi;
  const double gap_lo = (mean(ctx) - mean(cf)) / pooled_lo;
  v.require(gap_hi > 0.25, "td_cucb(mdp) - ucb(contextual) = " + std::to_string(gap_hi) + " pooled sd");
  v.require(gap_lo > 0.25, "ucb(contextual) - ucb(context_free) = " + std::to_string(gap_lo) + " pooled sd");

  const char* argv[] = {"mctl", "oracle", "--no-noise"};
  std::ostringstream out, err;
  const int code = run_cli(3, argv, out, err);
  v.require(code == 0, "oracle subcommand failed: " + err.str());
  v.require(out.str().find("ordering holds") != std::string::npos, "oracle reports: " + out.str());

  const double secs = seconds_since(t0);
  v.require(secs < 300.0, "runtime " + std::to_string(secs) + " s");
  v.detail << "means cf " << mean(cf) << ", ctx " << mean(ctx) << ", mdp " << mean(mdp) << "; gaps " << gap_lo
           << " and " << gap_hi << " pooled sd; oracle "
           << (out.str().find("ordering holds") != std::string::npos ? "holds" : "violated") << "; " << secs
           << " s";
  return v;
}

Verdict bo_beats_random() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto bo = eval_rewards(run_experiment(default_config(Algorithm::kBo, Formulation::kContextual)));
  const auto rs = eval_rewards(run_experiment(default_config(Algorithm::kRandom, Formulation::kContextual)));
  int wins = 0;
  for (std::size_t i = 0; i < bo.size(); ++i) wins += bo[i] > rs[i];
  v.require(wins >= 16, "BO ahead in only " + std::to_string(wins) + "/20 repeats");
  v.detail << "BO ahead in " << wins << "/20 paired repeats (means " << mean(bo) << " vs " << mean(rs) << "); "
           << seconds_since(t0) << " s";
  return v;
}

Verdict q_learning_zero_discount() {
  Verdict v;
  Rng rng(777);
  std::uniform_int_distribution<int> year(1, 5), act(0, 120);
  std::normal_distribution<double> rew(0.0, 60.0);
  std::uniform_real_distribution<double> alpha(1e-3, 1.0);
  std::uniform_int_distribution<int> length(1, 200);
  long compared = 0;
  for (int stream = 0; stream < 1000; ++stream) {
    const double a = alpha(rng);
    QTable q(121, a, 0.0);
    ContextualValueTable c(121, a);
    const int n = length(rng);
    for (int i = 0; i < n; ++i) {
      const int s = year(rng), j = act(rng);
      const double r = rew(rng);
      const bool terminal = s == kYears;
      q_learning_update(q, s, j, r, terminal ? s : s + 1, terminal);
      contextual_update(c, s, j, r);
    }
    v.require(std::memcmp(q.q.data(), c.q.data(), sizeof(double) * static_cast<std::size_t>(q.q.size())) == 0,
              "stream " + std::to_string(stream) + " differs bitwise");
    v.require(q.n == c.n, "visit counts differ in stream " + std::to_string(stream));
    compared += n;
  }
  v.detail << "1000 streams, " << compared << " updates, bitwise identical";
  return v;
}

}  // namespace

// Optional arguments select checks by number; none runs all of them.
int main(int argc, char** argv) {
  struct Check {
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Check> checks = {
      {"ucb_episode_121", ucb_episode_121},
      {"gp_dense_solve_oracle", gp_dense_oracle},
      {"reinforce_gradient_check", gradient_check},
      {"normalization", normalization},
      {"budget_and_determinism", budget_and_determinism},
      {"ga_elitism", ga_elitism},
      {"formulation_ordering", formulation_ordering},
      {"bo_beats_random_contextual", bo_beats_random},
      {"q_learning_zero_discount_equivalence", q_learning_zero_discount},
  };
  std::set<std::size_t> selected;
  for (int a = 1; a < argc; ++a) selected.insert(static_cast<std::size_t>(std::stoul(argv[a])));
  int failed = 0;
  std::size_t ran = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    ++ran;
    Verdict v;
    try {
      v = checks[i].run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    failed += !v.pass;
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << i + 1 << " " << checks[i].name << ": " << v.detail.str()
              << std::endl;
  }
  std::cout << (ran - static_cast<std::size_t>(failed)) << "/" << ran << " checks passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
