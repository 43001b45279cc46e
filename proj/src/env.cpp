#include "mctl/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mctl {

namespace {

bool is_fraction(double x) { return x >= 0.0 && x <= 1.0; }

void check_year(int year) {
  if (year < 1 || year > kYears) {
    throw StateError("year " + std::to_string(year) + " outside 1.." + std::to_string(kYears));
  }
}

}  // namespace

DiscreteActionSet::DiscreteActionSet(int grid_size) : k_(grid_size) {
  if (grid_size < 2) {
    throw std::invalid_argument("action grid needs at least 2 points per dimension");
  }
}

Action DiscreteActionSet::action(int index) const {
  if (index < 0 || index >= size()) {
    throw std::out_of_range("action index " + std::to_string(index) + " outside 0.." +
                            std::to_string(size() - 1));
  }
  return Action{grid_value(index / k_), grid_value(index % k_)};
}

int DiscreteActionSet::index(const Action& a) const {
  if (!a.valid()) {
    throw std::out_of_range("action coordinates outside [0,1]");
  }
  const auto snap = [this](double x) {
    return static_cast<int>(std::lround(x * static_cast<double>(k_ - 1)));
  };
  return snap(a.itn) * k_ + snap(a.irs);
}

Action discretize_index(int index, int grid_size) {
  return DiscreteActionSet(grid_size).action(index);
}

void SurrogateParams::validate() const {
  for (double w : year_weights) {
    if (!is_fraction(w)) throw std::invalid_argument("year weights must lie in [0,1]");
  }
  if (!is_fraction(resistance_decay) || !is_fraction(resistance_gain) ||
      !is_fraction(resistance_penalty) || !is_fraction(interaction)) {
    throw std::invalid_argument("resistance and interaction parameters must lie in [0,1]");
  }
  if (benefit_scale < 0.0 || cost_scale < 0.0 || noise_sd < 0.0) {
    throw std::invalid_argument("benefit, cost and noise scales must be non-negative");
  }
}

double surrogate_mean_reward(int year, double resistance, const Action& a,
                             const SurrogateParams& p) {
  check_year(year);
  if (!is_fraction(resistance)) {
    throw StateError("resistance outside [0,1]");
  }
  if (!a.valid()) {
    throw std::out_of_range("action coordinates outside [0,1]");
  }
  const double w = p.year_weights[static_cast<std::size_t>(year - 1)];
  const double e_itn = (1.0 - p.resistance_penalty * resistance) * std::sqrt(a.itn);
  const double e_irs = std::sqrt(a.irs);
  const double benefit = w * e_itn + (1.0 - w) * e_irs - p.interaction * e_itn * e_irs;
  return p.benefit_scale * benefit - p.cost_scale * (a.itn + a.irs);
}

double surrogate_next_resistance(double resistance, const Action& a, const SurrogateParams& p) {
  return std::clamp(p.resistance_decay * resistance + p.resistance_gain * a.itn, 0.0, 1.0);
}

StepOutcome surrogate_step(int year, double resistance, const Action& a, const SurrogateParams& p,
                           Rng& rng) {
  StepOutcome out;
  out.reward = surrogate_mean_reward(year, resistance, a, p);
  if (p.noise_enabled && p.noise_sd > 0.0) {
    out.reward += std::normal_distribution<double>(0.0, p.noise_sd)(rng);
  }
  out.next_resistance = surrogate_next_resistance(resistance, a, p);
  return out;
}

SurrogateEnv::SurrogateEnv(SurrogateParams params, std::uint64_t seed)
    : params_(params), rng_(seed) {
  params_.validate();
}

void SurrogateEnv::reset() {
  year_ = 1;
  resistance_ = 0.0;
  done_ = false;
}

SurrogateEnv::StepResult SurrogateEnv::step(const Action& a) {
  if (done_) {
    throw StateError("step called on a finished episode; call reset()");
  }
  const auto out = surrogate_step(year_, resistance_, a, params_, rng_);
  ++steps_;
  resistance_ = out.next_resistance;
  const int year = year_;
  if (year_ == kYears) {
    done_ = true;
  } else {
    ++year_;
  }
  return StepResult{out.reward, year, done_};
}

std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::kContextFree:
      return "context_free";
    case Formulation::kContextual:
      return "contextual";
    case Formulation::kMdp:
      return "mdp";
  }
  return "unknown";
}

Formulation parse_formulation(std::string_view name) {
  if (name == "context_free") return Formulation::kContextFree;
  if (name == "contextual") return Formulation::kContextual;
  if (name == "mdp") return Formulation::kMdp;
  throw std::invalid_argument("unknown formulation '" + std::string(name) + "'");
}

std::array<ContextualObservation, kYears> contextual_observations(const EpisodeTrace& trace) {
  std::array<ContextualObservation, kYears> out{};
  for (std::size_t t = 0; t < out.size(); ++t) {
    const auto& s = trace.steps[t];
    out[t] = ContextualObservation{s.year, s.action, s.reward};
  }
  return out;
}

std::array<Transition, kYears> mdp_transitions(const EpisodeTrace& trace) {
  std::array<Transition, kYears> out{};
  for (std::size_t t = 0; t < out.size(); ++t) {
    const auto& s = trace.steps[t];
    const bool terminal = s.year == kYears;
    out[t] = Transition{s.year, s.action, s.reward, terminal ? s.year : s.year + 1, terminal};
  }
  return out;
}

double ContextFreeView::play(const Action& a) {
  last_ = env_.run_episode([&a](int) { return a; });
  return last_.episodic_reward;
}

}  // namespace mctl
