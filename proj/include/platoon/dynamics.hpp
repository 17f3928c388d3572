#pragma once

#include <cstddef>
#include <vector>

namespace platoon {

/// Longitudinal state of one vehicle (m, m/s, m/s^2).
struct VehicleState {
  double x = 0.0;
  double v = 0.0;
  double a = 0.0;

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

/// Fixed simulation grid. `horizon / dt` must be an integer.
struct TimeGrid {
  double dt = 0.01;
  double horizon = 30.0;

  /// Number of steps; throws on a non-integral ratio or non-positive fields.
  std::size_t steps() const;
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
};

struct ManeuverSegment {
  double start_time = 0.0;    // s
  double acceleration = 0.0;  // m/s^2
};

/// Piecewise-constant lead acceleration command.
struct Maneuver {
  std::vector<ManeuverSegment> segments;
  double initial_velocity = 0.0;

  /// Throws Error(kInvalidInput) if the invariants are violated.
  void validate(double max_abs_accel = 10.0) const;

  /// Command active at time t (segment with the latest start <= t).
  double command_at(double t) const;

  /// L2 norm of the command signal over [0, horizon].
  double l2_norm(double horizon) const;
};

/// Exact zero-order-hold step of x' = v, v' = a, tau a' + a = u.
VehicleState step_lag(const VehicleState& state, double u, double tau, double dt);

/// Lead vehicle trajectory sampled on the grid (steps() + 1 samples),
/// starting at x = 0 with zero acceleration.
std::vector<VehicleState> lead_trajectory(const Maneuver& maneuver, double tau,
                                          const TimeGrid& grid);

}  // namespace platoon
