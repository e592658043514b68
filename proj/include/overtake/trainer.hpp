#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "overtake/highway_env.hpp"
#include "overtake/q_table.hpp"
#include "overtake/rng.hpp"
#include "overtake/td_learning.hpp"

namespace overtake {

struct EpisodeRecord {
  std::size_t episode = 0;
  bool collision = false;
  double distance_m = 0.0;
  double consumed_time_s = 0.0;
  double cumulative_reward = 0.0;
  double epsilon_used = 0.0;
  Terminal outcome = Terminal::running;
  std::size_t steps = 0;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct TrainResult {
  QTable table;
  std::vector<EpisodeRecord> records;
};

/// Receives every transition in the order the trainer applied it.
using TransitionObserver = std::function<void(const Transition&)>;

/// Per-step hook used for trajectory dumps.
using StepObserver = std::function<void(std::size_t step, ActionId action, const StepOutcome&)>;

template <class F>
concept EnvFactory = requires(F f) {
  { f() } -> std::convertible_to<HighwayEnv>;
};

/// Seed of the traffic scenario for training episode `episode`. Shared by
/// both algorithms so paired runs see the same traffic.
inline std::uint64_t episode_seed(std::uint64_t seed, std::size_t episode) {
  return derive_seed(seed, Stream::environment, episode);
}

namespace detail {
inline EpisodeRecord finish_record(std::size_t episode, const HighwayEnv& env, double reward_sum, double eps) {
  EpisodeRecord rec;
  rec.episode = episode;
  rec.outcome = env.status();
  rec.collision = env.status() == Terminal::collision;
  rec.distance_m = env.ego().position_m;
  rec.steps = env.steps_taken();
  rec.consumed_time_s = env.elapsed_s();
  rec.cumulative_reward = reward_sum;
  rec.epsilon_used = eps;
  return rec;
}
}  // namespace detail

/// Runs `params.episodes` episodes of Q-learning or Sarsa with an
/// epsilon-greedy behaviour policy. Goal and collision are absorbing
/// (bootstrap 0); hitting the step limit is a truncation and still bootstraps.
template <EnvFactory Factory>
TrainResult train(Factory&& make_env, Algorithm algo, const HyperParams& params, std::uint64_t seed,
                  const TransitionObserver& observer = {}) {
  params.validate();
  TrainResult result;
  result.records.reserve(params.episodes);
  if (params.episodes == 0) return result;

  HighwayEnv env = make_env();
  Rng rng = make_rng(seed, Stream::agent);
  const bool per_step = params.epsilon.unit == EpsilonSchedule::Unit::step;
  std::size_t global_step = 0;
  auto current_eps = [&](std::size_t episode) {
    return epsilon_at(params.epsilon, per_step ? global_step : episode);
  };

  for (std::size_t episode = 0; episode < params.episodes; ++episode) {
    const double eps_start = current_eps(episode);
    DiscreteState s = env.reset(episode_seed(seed, episode), params.steps_per_episode);
    ActionId a = epsilon_greedy(result.table, s, eps_start, rng);
    double reward_sum = 0.0;

    while (true) {
      const StepOutcome out = env.step(a);
      ++global_step;
      reward_sum += out.reward;
      const bool done = out.terminal != Terminal::running;
      Transition t{s, a, out.reward, out.observation, std::nullopt,
                   out.terminal == Terminal::goal_reached || out.terminal == Terminal::collision};

      if (algo == Algorithm::q_learning) {
        q_learning_update(result.table, t, params.alpha, params.beta);
        if (observer) observer(t);
        if (done) break;
        s = out.observation;
        a = epsilon_greedy(result.table, s, current_eps(episode), rng);
      } else {
        if (!t.terminal) t.a_next = epsilon_greedy(result.table, t.s_next, current_eps(episode), rng);
        sarsa_update(result.table, t, params.alpha, params.beta);
        if (observer) observer(t);
        if (done) break;
        s = out.observation;
        a = *t.a_next;
      }
    }
    result.records.push_back(detail::finish_record(episode, env, reward_sum, eps_start));
  }
  return result;
}

inline TrainResult train(const EnvConfig& config, Algorithm algo, const HyperParams& params, std::uint64_t seed,
                         const TransitionObserver& observer = {}) {
  return train([&config] { return HighwayEnv(config); }, algo, params, seed, observer);
}

/// Greedy (eps = 0) rollouts of a fixed table on evaluation-stream traffic.
inline std::vector<EpisodeRecord> evaluate_greedy(const QTable& table, const EnvConfig& config,
                                                  std::size_t episodes, std::size_t step_limit,
                                                  std::uint64_t seed, const StepObserver& on_step = {}) {
  if (step_limit == 0) throw UsageError("evaluate_greedy needs a positive step limit");
  HighwayEnv env(config);
  const GreedyPolicy policy = greedy_policy(table);
  std::vector<EpisodeRecord> records;
  records.reserve(episodes);
  for (std::size_t episode = 0; episode < episodes; ++episode) {
    DiscreteState s = env.reset(derive_seed(seed, Stream::evaluation, episode), step_limit);
    double reward_sum = 0.0;
    for (std::size_t step = 1;; ++step) {
      const ActionId a = policy(s);
      const StepOutcome out = env.step(a);
      reward_sum += out.reward;
      if (on_step && episode == 0) on_step(step, a, out);
      if (out.terminal != Terminal::running) break;
      s = out.observation;
    }
    records.push_back(detail::finish_record(episode, env, reward_sum, 0.0));
  }
  return records;
}

}  // namespace overtake
