#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "overtake/errors.hpp"
#include "overtake/format.hpp"
#include "overtake/highway_env.hpp"
#include "overtake/q_table.hpp"
#include "overtake/rng.hpp"

namespace overtake {

enum class Algorithm { q_learning, sarsa };

inline constexpr std::string_view to_string(Algorithm a) {
  return a == Algorithm::q_learning ? "q-learning" : "sarsa";
}

inline Algorithm parse_algorithm(std::string_view text) {
  if (text == "q-learning") return Algorithm::q_learning;
  if (text == "sarsa") return Algorithm::sarsa;
  throw ConfigError("unknown algorithm '" + std::string(text) + "' (expected q-learning or sarsa)");
}

/// Exploration rate as a function of episode (or global step) index.
struct EpsilonSchedule {
  enum class Kind { decay, fixed };
  enum class Unit { episode, step };

  Kind kind = Kind::decay;
  double base = 0.1;   // eps_0 for decay, the constant for fixed
  double rate = 0.99;  // decay factor per unit
  Unit unit = Unit::episode;

  static EpsilonSchedule decay(double base, double rate, Unit unit = Unit::episode) {
    return {Kind::decay, base, rate, unit};
  }
  static EpsilonSchedule fixed(double eps) { return {Kind::fixed, eps, 1.0, Unit::episode}; }

  void validate() const {
    if (!(base >= 0.0 && base <= 1.0)) throw ConfigError("params.epsilon must be in [0, 1]");
    if (kind == Kind::decay && !(rate >= 0.0 && rate <= 1.0))
      throw ConfigError("params.epsilon decay rate must be in [0, 1]");
  }

  /// "decay:0.1:0.99", "decay:0.1:0.99:step" or "fixed:0.1".
  std::string label() const;
  static EpsilonSchedule parse(std::string_view text);

  friend bool operator==(const EpsilonSchedule&, const EpsilonSchedule&) = default;
};

inline std::string EpsilonSchedule::label() const {
  if (kind == Kind::fixed) return "fixed:" + format_double(base);
  std::string text = "decay:" + format_double(base) + ":" + format_double(rate);
  if (unit == Unit::step) text += ":step";
  return text;
}

inline EpsilonSchedule EpsilonSchedule::parse(std::string_view text) {
  const auto parts = split(text, ':');
  EpsilonSchedule out;
  if (parts[0] == "fixed" && parts.size() == 2) {
    out = fixed(parse_number<double>(parts[1], "epsilon schedule"));
  } else if (parts[0] == "decay" && (parts.size() == 3 || parts.size() == 4)) {
    Unit unit = Unit::episode;
    if (parts.size() == 4) {
      if (parts[3] == "step") {
        unit = Unit::step;
      } else if (parts[3] != "episode") {
        throw ConfigError("epsilon schedule unit must be episode or step, got '" + std::string(parts[3]) + "'");
      }
    }
    out = decay(parse_number<double>(parts[1], "epsilon schedule"), parse_number<double>(parts[2], "epsilon schedule"),
                unit);
  } else {
    throw ConfigError("bad epsilon schedule '" + std::string(text) +
                      "' (expected fixed:EPS or decay:EPS0:RATE[:episode|step])");
  }
  out.validate();
  return out;
}

inline double epsilon_at(const EpsilonSchedule& schedule, std::size_t index) {
  if (schedule.kind == EpsilonSchedule::Kind::fixed) return schedule.base;
  return schedule.base * std::pow(schedule.rate, static_cast<double>(index));
}

struct HyperParams {
  double alpha = 0.9;
  double beta = 0.2;
  EpsilonSchedule epsilon = EpsilonSchedule::decay(0.1, 0.99);
  std::size_t episodes = 200;
  std::size_t steps_per_episode = 1000;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("params.alpha must be in [0, 1]");
    if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("params.beta must be in [0, 1)");
    if (steps_per_episode < 1) throw ConfigError("params.steps_per_episode must be >= 1");
    epsilon.validate();
  }
};

/// One sampled step of experience. `a_next` is only carried for Sarsa.
struct Transition {
  DiscreteState s;
  ActionId a;
  double r = 0.0;
  DiscreteState s_next;
  std::optional<ActionId> a_next;
  bool terminal = false;
};

/// Uniform random action with probability eps, else the lowest-id argmax.
inline ActionId epsilon_greedy(const QTable& q, const DiscreteState& s, double eps, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (eps > 0.0 && coin(rng) < eps) {
    std::uniform_int_distribution<int> pick(1, kActionCount);
    return ActionId::from_id(pick(rng));
  }
  return q.best_action(s);
}

namespace detail {
inline void td_step(QTable& q, const Transition& t, double bootstrap, double alpha, double beta) {
  if (!std::isfinite(t.r)) throw NumericError("non-finite reward in transition");
  const double old = q.value(t.s, t.a);
  q.set(t.s, t.a, old + alpha * (t.r + beta * bootstrap - old));
}
}  // namespace detail

/// Off-policy update: bootstraps on max_a' Q(s', a'), or 0 on a terminal transition.
inline void q_learning_update(QTable& q, const Transition& t, double alpha, double beta) {
  const double bootstrap = t.terminal ? 0.0 : q.max_value(t.s_next);
  detail::td_step(q, t, bootstrap, alpha, beta);
}

/// On-policy update: bootstraps on Q(s', a') for the action actually chosen next.
inline void sarsa_update(QTable& q, const Transition& t, double alpha, double beta) {
  if (!t.terminal && !t.a_next) throw UsageError("sarsa_update needs a_next on a non-terminal transition");
  const double bootstrap = t.terminal ? 0.0 : q.value(t.s_next, *t.a_next);
  detail::td_step(q, t, bootstrap, alpha, beta);
}

inline void td_update(Algorithm algo, QTable& q, const Transition& t, double alpha, double beta) {
  if (algo == Algorithm::q_learning) {
    q_learning_update(q, t, alpha, beta);
  } else {
    sarsa_update(q, t, alpha, beta);
  }
}

/// Greedy policy over a Q-table; unseen states map to a1.
class GreedyPolicy {
 public:
  explicit GreedyPolicy(const QTable& q) : q_(&q) {}
  ActionId operator()(const DiscreteState& s) const { return q_->best_action(s); }

 private:
  const QTable* q_;
};

inline GreedyPolicy greedy_policy(const QTable& q) { return GreedyPolicy(q); }

}  // namespace overtake
