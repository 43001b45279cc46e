#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "mctl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = mctl::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mctl_cli_" + name);
  fs::remove_all(p);
  return p;
}

// Exhaustive 121-action search over repeated actions with the default surrogate, noise off.
double repeated_action_optimum() {
  const double w[5] = {0.9, 0.7, 0.5, 0.3, 0.1};
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < 121; ++j) {
    const double itn = (j / 11) / 10.0, irs = (j % 11) / 10.0;
    double r = 0.0, total = 0.0;
    for (int t = 0; t < 5; ++t) {
      const double ei = (1.0 - 0.8 * r) * std::sqrt(itn), es = std::sqrt(irs);
      total += 100.0 * (w[t] * ei + (1.0 - w[t]) * es - 0.3 * ei * es) - 20.0 * (itn + irs);
      r = std::min(1.0, 0.7 * r + 0.5 * itn);
    }
    best = std::max(best, total);
  }
  return best;
}

}  // namespace

TEST(Cli, RunWritesFiles) {
  const auto dir = scratch("run");
  const auto res = run({"run", "--algo", "ucb", "--formulation", "context_free", "--seed", "7", "--repeats", "2",
                        "--out", dir.string()});
  EXPECT_EQ(res.code, 0) << res.err;
  EXPECT_TRUE(fs::exists(dir / "results.csv"));
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "ucb_context_free" / "repeat_1" / "policy.json"));
  fs::remove_all(dir);
}

TEST(Cli, RunWithDefaultRepeats) {
  const auto dir = scratch("run_default");
  const auto res = run({"run", "--algo", "ucb", "--formulation", "context_free", "--seed", "7", "--out", dir.string()});
  EXPECT_EQ(res.code, 0) << res.err;
  std::ifstream in(dir / "results.csv");
  int lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, 8001);
  fs::remove_all(dir);
}

TEST(Cli, IncompatiblePairFails) {
  const auto res = run({"run", "--algo", "random", "--formulation", "mdp", "--out", scratch("bad").string()});
  EXPECT_NE(res.code, 0);
  EXPECT_NE(res.err.find("not applicable to MDPs"), std::string::npos) << res.err;
  EXPECT_FALSE(fs::exists(scratch("bad") / "results.csv"));
}

TEST(Cli, UnknownFlagOrSubcommandFails) {
  EXPECT_NE(run({"run", "--bogus"}).code, 0);
  EXPECT_NE(run({"frobnicate"}).code, 0);
  EXPECT_NE(run({}).code, 0);
  EXPECT_NE(run({"run", "--algo", "nope"}).code, 0);
}

TEST(Cli, OraclePrintsExhaustiveOptimum) {
  const auto res = run({"oracle", "--no-noise"});
  ASSERT_EQ(res.code, 0) << res.err;
  std::istringstream in(res.out);
  std::string key;
  double value = 0.0;
  in >> key >> value;
  EXPECT_EQ(key, "context_free_optimum");
  EXPECT_NEAR(value, repeated_action_optimum(), 1e-9);
  EXPECT_NE(res.out.find("ordering holds"), std::string::npos) << res.out;
}

TEST(Cli, ConfigThenFlagsPrecedence) {
  const auto dir = scratch("cfg");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "c.yaml");
    cfg << "algo: epsilon_greedy\nformulation: contextual\nrepeats: 1\nepisodes: 30\nout: "
        << (dir / "from_config").string() << "\n";
  }
  auto res = run({"run", "--config", (dir / "c.yaml").string(), "--episodes", "20"});
  ASSERT_EQ(res.code, 0) << res.err;
  std::ifstream in(dir / "from_config" / "results.csv");
  int lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, 21);
  EXPECT_TRUE(fs::exists(dir / "from_config" / "epsilon_greedy_contextual"));

  res = run({"run", "--config", (dir / "missing.yaml").string()});
  EXPECT_EQ(res.code, 2);
  fs::remove_all(dir);
}

TEST(Cli, EvalReplaysPolicy) {
  const auto dir = scratch("eval");
  ASSERT_EQ(run({"run", "--algo", "td_cucb", "--formulation", "mdp", "--repeats", "1", "--no-noise", "--out",
                 dir.string()})
                .code,
            0);
  const auto policy = dir / "td_cucb_mdp" / "repeat_0" / "policy.json";
  const auto res = run({"eval", "--policy", policy.string(), "--no-noise"});
  ASSERT_EQ(res.code, 0) << res.err;
  std::ifstream pj(policy);
  std::stringstream buf;
  buf << pj.rdbuf();
  const std::string text = buf.str();
  const auto pos = text.find("\"eval_reward\":");
  ASSERT_NE(pos, std::string::npos);
  const double stored = std::stod(text.substr(pos + 14));
  std::istringstream out(res.out);
  std::string a, b;
  double replayed = 0.0;
  out >> a >> b >> replayed;
  EXPECT_NEAR(replayed, stored, 1e-9);
  EXPECT_NE(run({"eval", "--policy", (dir / "nope.json").string()}).code, 0);
  fs::remove_all(dir);
}
