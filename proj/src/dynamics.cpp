#include "platoon/dynamics.hpp"

#include <cmath>
#include <string>

#include "platoon/error.hpp"

namespace platoon {
namespace {

bool finite(const VehicleState& s) {
  return std::isfinite(s.x) && std::isfinite(s.v) && std::isfinite(s.a);
}

// r - (1 - e^{-r}), evaluated without cancellation for small r.
double ramp_remainder(double r) {
  if (r < 0.5) {
    double term = r * r / 2.0;
    double sum = 0.0;
    for (int k = 3; k < 40 && std::abs(term) > 1e-300; ++k) {
      sum += term;
      term *= -r / k;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return r + std::expm1(-r);
}

}  // namespace

std::size_t TimeGrid::steps() const {
  if (!(dt > 0.0) || !(horizon > 0.0) || !std::isfinite(dt) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::kInvalidInput, "time grid needs dt > 0 and horizon > 0");
  }
  const double ratio = horizon / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, n)) {
    throw Error(ErrorCode::kInvalidInput,
                "horizon / dt is not an integer (" + std::to_string(ratio) + ")");
  }
  return static_cast<std::size_t>(n);
}

void Maneuver::validate(double max_abs_accel) const {
  if (segments.empty()) {
    throw Error(ErrorCode::kInvalidInput, "maneuver has no segments");
  }
  if (segments.front().start_time != 0.0) {
    throw Error(ErrorCode::kInvalidInput, "first maneuver segment must start at t = 0");
  }
  if (!std::isfinite(initial_velocity)) {
    throw Error(ErrorCode::kInvalidInput, "maneuver initial velocity is not finite");
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!std::isfinite(s.acceleration) || std::abs(s.acceleration) > max_abs_accel) {
      throw Error(ErrorCode::kInvalidInput,
                  "maneuver acceleration out of bounds in segment " + std::to_string(i));
    }
    if (i > 0 && !(s.start_time > segments[i - 1].start_time)) {
      throw Error(ErrorCode::kInvalidInput, "maneuver start times must be strictly increasing");
    }
  }
}

double Maneuver::command_at(double t) const {
  double u = 0.0;
  // Tolerance so that a boundary that is a grid multiple is hit on time.
  for (const auto& s : segments) {
    if (s.start_time <= t + 1e-9) u = s.acceleration;
    else break;
  }
  return u;
}

double Maneuver::l2_norm(double horizon) const {
  double energy = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const double begin = std::min(segments[i].start_time, horizon);
    const double end = i + 1 < segments.size() ? std::min(segments[i + 1].start_time, horizon)
                                                : horizon;
    energy += segments[i].acceleration * segments[i].acceleration * (end - begin);
  }
  return std::sqrt(energy);
}

VehicleState step_lag(const VehicleState& state, double u, double tau, double dt) {
  if (!finite(state) || !std::isfinite(u) || !std::isfinite(tau) || !std::isfinite(dt)) {
    throw Error(ErrorCode::kInvalidInput, "step_lag: non-finite input");
  }
  if (!(tau > 0.0) || !(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "step_lag: tau and dt must be positive");
  }
  const double r = dt / tau;
  const double decay = std::exp(-r);
  const double one_minus_decay = -std::expm1(-r);
  const double delta = state.a - u;

  VehicleState next;
  next.a = u + delta * decay;
  next.v = state.v + u * dt + delta * tau * one_minus_decay;
  next.x = state.x + state.v * dt + 0.5 * u * dt * dt + delta * tau * tau * ramp_remainder(r);
  return next;
}

std::vector<VehicleState> lead_trajectory(const Maneuver& maneuver, double tau,
                                          const TimeGrid& grid) {
  maneuver.validate();
  const std::size_t n = grid.steps();
  std::vector<VehicleState> out;
  out.reserve(n + 1);
  VehicleState s{0.0, maneuver.initial_velocity, 0.0};
  out.push_back(s);
  for (std::size_t k = 0; k < n; ++k) {
    s = step_lag(s, maneuver.command_at(grid.time(k)), tau, grid.dt);
    out.push_back(s);
  }
  return out;
}

}  // namespace platoon
