#pragma once

#include <algorithm>

namespace overtake::kinematics {

/// Displacement over one sampling interval for a vehicle whose speed moves
/// linearly from `v_prev` to `v`. Defined for v == v_prev.
constexpr double trapezoid_displacement(double v, double v_prev, double dt) {
  return (v + v_prev) * dt / 2.0;
}

/// The textbook form (v² − v′²) / 2a with a = (v − v′) / dt. Singular when
/// v == v_prev; kept only to cross-check trapezoid_displacement.
constexpr double closed_form_displacement(double v, double v_prev, double dt) {
  const double accel = (v - v_prev) / dt;
  return (v * v - v_prev * v_prev) / (2.0 * accel);
}

struct Motion {
  double velocity;
  double displacement;
};

/// Constant-acceleration update of the ego vehicle with the speed held in
/// [0, v_max]. Once a bound is hit the vehicle cruises at that bound for
/// the rest of the interval, so the displacement matches the realized speed.
constexpr Motion integrate_clamped(double v_prev, double accel, double dt, double v_max) {
  const double unclamped = v_prev + accel * dt;
  if (accel > 0.0 && unclamped > v_max) {
    const double t_hit = std::max(0.0, (v_max - v_prev) / accel);
    return {v_max, v_prev * t_hit + 0.5 * accel * t_hit * t_hit + v_max * (dt - t_hit)};
  }
  if (accel < 0.0 && unclamped < 0.0) {
    const double t_hit = std::max(0.0, v_prev / -accel);
    return {0.0, v_prev * t_hit + 0.5 * accel * t_hit * t_hit};
  }
  return {unclamped, v_prev * dt + 0.5 * accel * dt * dt};
}

}  // namespace overtake::kinematics
