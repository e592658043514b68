#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "overtake/errors.hpp"
#include "overtake/kinematics.hpp"
#include "overtake/rng.hpp"

namespace overtake {

inline constexpr int kLaneCount = 2;
inline constexpr std::size_t kSlotCount = 4;
inline constexpr int kActionCount = 6;

struct VehicleState {
  double position_m = 0.0;
  double velocity_mps = 0.0;
  double accel_mps2 = 0.0;
  int lane = 1;
};

/// Scenario parameters. Every field is a key of the `env` config section.
struct EnvConfig {
  int n_per_lane = 5;
  double road_length_m = 1000.0;
  double dt_s = 1.0;
  double x_max_m = 50.0;
  int n_d = 3;
  int n_v = 1;
  double v_e_max_mps = 25.0;
  double v_i_max_mps = 20.0;
  double d_collision_m = 5.0;
  std::uint64_t seed = 0;

  // Surrounding-traffic placement.
  double spawn_min_m = 50.0;
  double spawn_max_m = 950.0;
  double spawn_jitter_m = 20.0;
  double init_speed_min_mps = 5.0;

  bool include_ego_lane = false;
  /// Speed error in the reward is divided by v_e_max (true) or taken raw in m/s.
  bool normalize_speed_penalty = true;

  void validate() const {
    auto require = [](bool ok, std::string_view key, std::string_view bound) {
      if (!ok) throw ConfigError("env." + std::string(key) + " must be " + std::string(bound));
    };
    require(n_per_lane >= 0, "n_per_lane", ">= 0");
    require(road_length_m > 0.0, "road_length_m", "> 0");
    require(dt_s > 0.0, "dt_s", "> 0");
    require(x_max_m > 0.0, "x_max_m", "> 0");
    require(n_d >= 1 && n_d <= 255, "n_d", "in [1, 255]");
    require(n_v >= 1 && n_v <= 255, "n_v", "in [1, 255]");
    require(v_e_max_mps > 0.0, "v_e_max_mps", "> 0");
    require(v_i_max_mps > 0.0, "v_i_max_mps", "> 0");
    require(d_collision_m > 0.0, "d_collision_m", "> 0");
    require(spawn_min_m >= 0.0 && spawn_min_m <= spawn_max_m, "spawn_min_m", "in [0, spawn_max_m]");
    require(spawn_jitter_m >= 0.0, "spawn_jitter_m", ">= 0");
    require(init_speed_min_mps >= 0.0 && init_speed_min_mps <= v_i_max_mps, "init_speed_min_mps",
            "in [0, v_i_max_mps]");
  }
};

enum class Slot : std::uint8_t { lane1_front = 0, lane1_rear = 1, lane2_front = 2, lane2_rear = 3 };

struct NeighborSlot {
  Slot slot = Slot::lane1_front;
  bool present = false;
  double rel_distance_m = 0.0;
  double rel_speed_mps = 0.0;
};

using Neighborhood = std::array<NeighborSlot, kSlotCount>;

/// Discretized observation: distance and speed indices for the four slots,
/// plus the ego lane when `include_ego_lane` is on (0 when unobserved).
struct DiscreteState {
  std::array<int, kSlotCount> d_index{};
  std::array<int, kSlotCount> v_index{};
  int ego_lane = 0;

  friend bool operator==(const DiscreteState&, const DiscreteState&) = default;
};

/// One of the six ego actions: (lane, acceleration) in the fixed order
/// a1 = (1,+1), a2 = (1,-1), a3 = (1,0), a4 = (2,+1), a5 = (2,-1), a6 = (2,0).
class ActionId {
 public:
  constexpr ActionId() = default;

  static constexpr ActionId from_id(int id) {
    if (id < 1 || id > kActionCount) throw UsageError("action id out of range: " + std::to_string(id));
    return ActionId(id);
  }

  static constexpr ActionId from_lane_accel(int lane, int accel) {
    if (lane < 1 || lane > kLaneCount || accel < -1 || accel > 1)
      throw UsageError("no action for lane " + std::to_string(lane) + ", accel " + std::to_string(accel));
    constexpr std::array<int, 3> offset_by_accel{1, 2, 0};  // -1, 0, +1
    return ActionId((lane - 1) * 3 + offset_by_accel[static_cast<std::size_t>(accel + 1)] + 1);
  }

  constexpr int id() const { return id_; }
  constexpr std::size_t index() const { return static_cast<std::size_t>(id_ - 1); }
  constexpr int lane() const { return (id_ - 1) / 3 + 1; }
  constexpr int accel() const {
    constexpr std::array<int, 3> accel_by_offset{+1, -1, 0};
    return accel_by_offset[static_cast<std::size_t>((id_ - 1) % 3)];
  }

  friend constexpr bool operator==(ActionId, ActionId) = default;

 private:
  constexpr explicit ActionId(int id) : id_(id) {}
  int id_ = 1;
};

inline constexpr std::array<ActionId, kActionCount> all_actions() {
  return {ActionId::from_id(1), ActionId::from_id(2), ActionId::from_id(3),
          ActionId::from_id(4), ActionId::from_id(5), ActionId::from_id(6)};
}

enum class Terminal : std::uint8_t { running, goal_reached, collision, step_limit };

inline constexpr std::string_view to_string(Terminal t) {
  switch (t) {
    case Terminal::running: return "running";
    case Terminal::goal_reached: return "goal-reached";
    case Terminal::collision: return "collision";
    case Terminal::step_limit: return "step-limit";
  }
  return "unknown";
}

/// Road-edge crashes cannot happen with the absolute-lane action set; the
/// value exists for a lateral model to use.
enum class CollisionReason : std::uint8_t { none, vehicle, road_edge };

struct StepOutcome {
  DiscreteState observation;
  double reward = 0.0;
  Terminal terminal = Terminal::running;
  CollisionReason collision_reason = CollisionReason::none;
  VehicleState ego;
};

inline constexpr double kCollisionReward = -100.0;
inline constexpr double kSpeedPenaltyWeight = 10.0;

// --- pure pieces of the model ----------------------------------------------

/// Nearest vehicle at or ahead of the ego and nearest behind it, per lane.
inline Neighborhood neighbors(const VehicleState& ego, std::span<const VehicleState> traffic,
                              const EnvConfig& config) {
  Neighborhood slots;
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    slots[i] = NeighborSlot{static_cast<Slot>(i), false, config.x_max_m, 0.0};
  }
  std::array<const VehicleState*, kSlotCount> nearest{};
  for (const VehicleState& other : traffic) {
    const bool ahead = other.position_m >= ego.position_m;
    const std::size_t slot = static_cast<std::size_t>((other.lane - 1) * 2 + (ahead ? 0 : 1));
    const VehicleState* best = nearest[slot];
    if (best == nullptr || std::abs(other.position_m - ego.position_m) < std::abs(best->position_m - ego.position_m)) {
      nearest[slot] = &other;
    }
  }
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    if (nearest[i] == nullptr) continue;
    slots[i].present = true;
    slots[i].rel_distance_m = std::min(std::abs(nearest[i]->position_m - ego.position_m), config.x_max_m);
    slots[i].rel_speed_mps = std::abs(nearest[i]->velocity_mps - ego.velocity_mps);
  }
  return slots;
}

/// round(value * count / scale) with half-away-from-zero rounding, clamped to [0, count].
inline int index_of(double value, int count, double scale) {
  const double raw = std::round(value * static_cast<double>(count) / scale);
  if (!(raw > 0.0)) return 0;
  if (raw >= static_cast<double>(count)) return count;
  return static_cast<int>(raw);
}

inline DiscreteState discretize(const Neighborhood& slots, const EnvConfig& config) {
  DiscreteState state;
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    state.d_index[i] = index_of(slots[i].rel_distance_m, config.n_d, config.x_max_m);
    state.v_index[i] = index_of(slots[i].rel_speed_mps, config.n_v, config.v_i_max_mps);
  }
  return state;
}

inline bool check_collision(const VehicleState& ego, std::span<const VehicleState> traffic,
                            const EnvConfig& config) {
  for (const VehicleState& other : traffic) {
    if (other.lane == ego.lane && std::abs(other.position_m - ego.position_m) < config.d_collision_m) return true;
  }
  return false;
}

/// Non-collision reward: -10 (v_e - v_e_max)^2, optionally on the speed scaled by v_e_max.
inline double speed_reward(double ego_velocity, const EnvConfig& config) {
  double error = ego_velocity - config.v_e_max_mps;
  if (config.normalize_speed_penalty) error /= config.v_e_max_mps;
  return -kSpeedPenaltyWeight * error * error;
}

// --- stateful episode ------------------------------------------------------

/// Two-lane overtaking episode. Single owner; each instance carries its own RNG.
class HighwayEnv {
 public:
  explicit HighwayEnv(EnvConfig config) : config_(std::move(config)) { config_.validate(); }

  const EnvConfig& config() const { return config_; }

  /// Starts a new episode. `step_limit` = 0 means unlimited.
  DiscreteState reset(std::uint64_t seed, std::size_t step_limit = 0) {
    rng_.seed(seed);
    step_limit_ = step_limit;
    steps_ = 0;
    status_ = Terminal::running;
    ego_ = VehicleState{0.0, 0.0, 0.0, 1};
    traffic_.clear();
    traffic_.reserve(static_cast<std::size_t>(config_.n_per_lane) * kLaneCount);

    const int n = config_.n_per_lane;
    const double band = config_.spawn_max_m - config_.spawn_min_m;
    std::uniform_real_distribution<double> jitter(-config_.spawn_jitter_m, config_.spawn_jitter_m);
    std::uniform_real_distribution<double> speed(config_.init_speed_min_mps, config_.v_i_max_mps);
    for (int lane = 1; lane <= kLaneCount; ++lane) {
      for (int j = 0; j < n; ++j) {
        const double anchor = config_.spawn_min_m + (j + 0.5) * band / n;
        VehicleState v;
        v.lane = lane;
        v.position_m = std::clamp(anchor + jitter(rng_), config_.spawn_min_m, config_.spawn_max_m);
        v.velocity_mps = speed(rng_);
        traffic_.push_back(v);
      }
    }
    return observe();
  }

  /// Replaces the scenario with an explicit one for a fresh running episode.
  void place(VehicleState ego, std::vector<VehicleState> traffic, std::uint64_t seed = 0,
             std::size_t step_limit = 0) {
    rng_.seed(seed);
    step_limit_ = step_limit;
    steps_ = 0;
    status_ = Terminal::running;
    ego_ = ego;
    traffic_ = std::move(traffic);
  }

  StepOutcome step(ActionId action) {
    if (status_ != Terminal::running) {
      throw UsageError("step() on a finished episode (" + std::string(to_string(status_)) + ")");
    }
    ego_.lane = action.lane();
    ego_.accel_mps2 = static_cast<double>(action.accel());
    const auto motion =
        kinematics::integrate_clamped(ego_.velocity_mps, ego_.accel_mps2, config_.dt_s, config_.v_e_max_mps);
    ego_.velocity_mps = motion.velocity;
    ego_.position_m += motion.displacement;

    std::uniform_int_distribution<int> delta(-1, 1);
    for (VehicleState& other : traffic_) {
      const double v_prev = other.velocity_mps;
      other.velocity_mps = std::clamp(v_prev + delta(rng_), 0.0, config_.v_i_max_mps);
      other.accel_mps2 = (other.velocity_mps - v_prev) / config_.dt_s;
      other.position_m += kinematics::trapezoid_displacement(other.velocity_mps, v_prev, config_.dt_s);
    }
    ++steps_;

    StepOutcome out;
    if (ego_.position_m >= config_.road_length_m) {
      status_ = Terminal::goal_reached;
      out.reward = speed_reward(ego_.velocity_mps, config_);
    } else if (check_collision(ego_, traffic_, config_)) {
      status_ = Terminal::collision;
      out.collision_reason = CollisionReason::vehicle;
      out.reward = kCollisionReward;
    } else {
      out.reward = speed_reward(ego_.velocity_mps, config_);
      if (step_limit_ != 0 && steps_ >= step_limit_) status_ = Terminal::step_limit;
    }
    out.terminal = status_;
    out.observation = observe();
    out.ego = ego_;
    return out;
  }

  DiscreteState observe() const {
    DiscreteState state = discretize(neighbors(), config_);
    if (config_.include_ego_lane) state.ego_lane = ego_.lane;
    return state;
  }

  Neighborhood neighbors() const { return overtake::neighbors(ego_, traffic_, config_); }
  bool collided() const { return check_collision(ego_, traffic_, config_); }

  const VehicleState& ego() const { return ego_; }
  std::span<const VehicleState> traffic() const { return traffic_; }
  std::size_t steps_taken() const { return steps_; }
  Terminal status() const { return status_; }
  double elapsed_s() const { return static_cast<double>(steps_) * config_.dt_s; }

 private:
  EnvConfig config_;
  Rng rng_;
  VehicleState ego_;
  std::vector<VehicleState> traffic_;
  std::size_t steps_ = 0;
  std::size_t step_limit_ = 0;
  Terminal status_ = Terminal::running;
};

}  // namespace overtake
