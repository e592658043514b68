#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "overtake/errors.hpp"
#include "overtake/highway_env.hpp"
#include "overtake/td_learning.hpp"
#include "overtake/trainer.hpp"

namespace overtake {

inline constexpr std::size_t kTrailingWindow = 50;

struct ExperimentSpec {
  std::string label;
  EnvConfig env;
  Algorithm algo = Algorithm::q_learning;
  HyperParams params;
  std::size_t replications = 1;
  std::uint64_t base_seed = 0;
  /// Worker threads; 0 = hardware concurrency. Output does not depend on it.
  std::size_t threads = 0;

  std::uint64_t replication_seed(std::size_t k) const { return base_seed + k; }

  void validate() const {
    if (replications < 1) throw ConfigError("experiment.replications must be >= 1");
    env.validate();
    params.validate();
  }
};

struct FieldStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct EpisodeAggregate {
  FieldStats collision;
  FieldStats distance_m;
  FieldStats consumed_time_s;
  FieldStats cumulative_reward;
  FieldStats epsilon_used;
};

struct OutcomeCounts {
  std::size_t goal_reached = 0;
  std::size_t collision = 0;
  std::size_t step_limit = 0;
  std::size_t total() const { return goal_reached + collision + step_limit; }
};

struct Summary {
  std::string label;
  std::size_t replications = 0;
  std::size_t episodes = 0;
  std::vector<EpisodeAggregate> per_episode;
  /// First episode with distance >= road length, per replication.
  std::vector<std::optional<std::size_t>> first_success;
  /// Collision rate over the first / last `window` episodes, per replication.
  std::vector<double> leading_collision_rate;
  std::vector<double> trailing_collision_rate;
  /// Mean consumed time over the last `window` episodes, per replication.
  std::vector<double> trailing_consumed_time_s;
  std::vector<OutcomeCounts> outcomes;
  std::size_t window = 0;

  double mean_trailing_collision_rate = 0.0;
  double mean_trailing_consumed_time_s = 0.0;
  /// Median first-success; replications that never succeed count as `episodes`.
  double median_first_success = 0.0;
};

using RecordMatrix = std::vector<std::vector<EpisodeRecord>>;

struct ExperimentResult {
  ExperimentSpec spec;
  RecordMatrix records;
  Summary summary;
};

namespace detail {

inline double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double sum = 0.0;
  for (const double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

inline double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t mid = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[mid] : (xs[mid - 1] + xs[mid]) / 2.0;
}

template <class Field>
FieldStats column_stats(const RecordMatrix& m, std::size_t episode, Field field) {
  FieldStats s{0.0, std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  double sum = 0.0;
  for (const auto& row : m) {
    const double x = field(row[episode]);
    sum += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = sum / static_cast<double>(m.size());
  return s;
}

inline double window_rate(const std::vector<EpisodeRecord>& row, std::size_t begin, std::size_t end) {
  if (begin >= end) return 0.0;
  double hits = 0.0;
  for (std::size_t i = begin; i < end; ++i) hits += row[i].collision ? 1.0 : 0.0;
  return hits / static_cast<double>(end - begin);
}

}  // namespace detail

inline Summary summarize(const RecordMatrix& records, double road_length_m, std::string label = {}) {
  Summary s;
  s.label = std::move(label);
  s.replications = records.size();
  s.episodes = records.empty() ? 0 : records.front().size();
  for (const auto& row : records) {
    if (row.size() != s.episodes) throw UsageError("ragged record matrix");
  }
  s.window = std::min(kTrailingWindow, s.episodes);
  if (s.episodes > 0) {
    s.per_episode.reserve(s.episodes);
    for (std::size_t e = 0; e < s.episodes; ++e) {
      EpisodeAggregate agg;
      agg.collision = detail::column_stats(records, e, [](const EpisodeRecord& r) { return r.collision ? 1.0 : 0.0; });
      agg.distance_m = detail::column_stats(records, e, [](const EpisodeRecord& r) { return r.distance_m; });
      agg.consumed_time_s = detail::column_stats(records, e, [](const EpisodeRecord& r) { return r.consumed_time_s; });
      agg.cumulative_reward =
          detail::column_stats(records, e, [](const EpisodeRecord& r) { return r.cumulative_reward; });
      agg.epsilon_used = detail::column_stats(records, e, [](const EpisodeRecord& r) { return r.epsilon_used; });
      s.per_episode.push_back(agg);
    }
  }

  std::vector<double> first_for_median;
  for (const auto& row : records) {
    std::optional<std::size_t> first;
    OutcomeCounts counts;
    double time_sum = 0.0;
    for (const EpisodeRecord& r : row) {
      if (!first && r.distance_m >= road_length_m) first = r.episode;
      switch (r.outcome) {
        case Terminal::goal_reached: ++counts.goal_reached; break;
        case Terminal::collision: ++counts.collision; break;
        case Terminal::step_limit: ++counts.step_limit; break;
        case Terminal::running: break;
      }
    }
    for (std::size_t i = s.episodes - s.window; i < s.episodes; ++i) time_sum += row[i].consumed_time_s;
    s.first_success.push_back(first);
    first_for_median.push_back(static_cast<double>(first.value_or(s.episodes)));
    s.leading_collision_rate.push_back(detail::window_rate(row, 0, s.window));
    s.trailing_collision_rate.push_back(detail::window_rate(row, s.episodes - s.window, s.episodes));
    s.trailing_consumed_time_s.push_back(s.window == 0 ? 0.0 : time_sum / static_cast<double>(s.window));
    s.outcomes.push_back(counts);
  }
  s.mean_trailing_collision_rate = detail::mean_of(s.trailing_collision_rate);
  s.mean_trailing_consumed_time_s = detail::mean_of(s.trailing_consumed_time_s);
  s.median_first_success = detail::median_of(first_for_median);
  return s;
}

/// Trains `spec.replications` independent agents, replication k on seed
/// base_seed + k. Results are placed by index, so thread count and
/// scheduling order do not affect the output.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult result;
  result.spec = spec;
  result.records.resize(spec.replications);

  std::size_t workers = spec.threads != 0 ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, spec.replications);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= spec.replications) return;
      try {
        result.records[k] = train(spec.env, spec.algo, spec.params, spec.replication_seed(k)).records;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  result.summary = summarize(result.records, spec.env.road_length_m, spec.label);
  return result;
}

struct PairedResult {
  ExperimentResult q_learning;
  ExperimentResult sarsa;
};

/// Both algorithms on identical config and seeds.
inline PairedResult compare_algorithms(const EnvConfig& env, const HyperParams& params, std::size_t replications,
                                       std::uint64_t base_seed, std::size_t threads = 0) {
  ExperimentSpec spec{"q-learning", env, Algorithm::q_learning, params, replications, base_seed, threads};
  PairedResult out;
  out.q_learning = run_experiment(spec);
  spec.label = "sarsa";
  spec.algo = Algorithm::sarsa;
  out.sarsa = run_experiment(spec);
  return out;
}

/// One experiment per exploration schedule, common seeds.
inline std::vector<ExperimentResult> sweep_epsilon(const EnvConfig& env, const HyperParams& params, Algorithm algo,
                                                   const std::vector<EpsilonSchedule>& schedules,
                                                   std::size_t replications, std::uint64_t base_seed,
                                                   std::size_t threads = 0) {
  if (schedules.empty()) throw ConfigError("empty sweep");
  std::vector<ExperimentResult> out;
  out.reserve(schedules.size());
  for (const EpsilonSchedule& schedule : schedules) {
    HyperParams p = params;
    p.epsilon = schedule;
    out.push_back(run_experiment({schedule.label(), env, algo, p, replications, base_seed, threads}));
  }
  return out;
}

/// One experiment per traffic density (vehicles per lane), common seeds.
inline std::vector<ExperimentResult> sweep_density(const EnvConfig& env, const HyperParams& params, Algorithm algo,
                                                   const std::vector<int>& densities, std::size_t replications,
                                                   std::uint64_t base_seed, std::size_t threads = 0) {
  if (densities.empty()) throw ConfigError("empty sweep");
  std::vector<ExperimentResult> out;
  out.reserve(densities.size());
  for (const int n : densities) {
    EnvConfig e = env;
    e.n_per_lane = n;
    out.push_back(run_experiment({"n=" + std::to_string(n), e, algo, params, replications, base_seed, threads}));
  }
  return out;
}

}  // namespace overtake
