#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "platoon/dynamics.hpp"

namespace platoon {

/// Acceleration surface over (pedal fraction, velocity). Row-major grid:
/// accel[i * velocity.size() + j] belongs to (pedal[i], velocity[j]).
struct PedalMap {
  std::vector<double> pedal;
  std::vector<double> velocity;
  std::vector<double> accel;

  void validate() const;
  double node(std::size_t i, std::size_t j) const { return accel[i * velocity.size() + j]; }
};

enum class MapKind { kThrottle, kBrake };

/// Bilinear interpolation, clamping both inputs to the grid edges.
double interp(const PedalMap& map, double pedal, double velocity);

/// Pedal that makes the map produce `target` at `velocity`. The slice along
/// the pedal axis must be strictly increasing (throttle) or strictly
/// decreasing (brake). Out-of-range targets clamp to the pedal end points.
double invert_pedal(const PedalMap& map, MapKind kind, double velocity, double target);

PedalMap read_pedal_map_csv(std::istream& in);
PedalMap load_pedal_map_csv(const std::string& path);
void write_pedal_map_csv(std::ostream& out, const PedalMap& map);

struct VehicleMaps {
  PedalMap throttle;
  PedalMap brake;

  void validate() const;
};

struct SyntheticMapParams {
  double throttle_max = 3.5;     // m/s^2 at standstill, full pedal
  double brake_max = 10.0;       // m/s^2, full pedal
  double curvature = 0.5;        // pedal nonlinearity; 0 gives linear pedal response
  double speed_falloff = 80.0;   // m/s scale of the throttle power falloff
  double drag_linear = 0.006;    // 1/s
  double drag_quadratic = 0.0004;  // 1/m
  std::vector<double> pedal_axis;     // default 0:0.05:1
  std::vector<double> velocity_axis;  // default 0:2.5:40
};

/// Smooth saturating throttle and brake surfaces with zero drag at rest.
VehicleMaps synthetic_maps(const SyntheticMapParams& params = {});

/// Throttle T = c0 + c1 v + slope p and brake B = c0 + c1 v - slope p.
VehicleMaps affine_maps(double c0, double c1, double throttle_slope, double brake_slope,
                        const std::vector<double>& pedal_axis,
                        const std::vector<double>& velocity_axis);

struct EmpiricalVehicle {
  std::shared_ptr<const VehicleMaps> maps;
  double tau = 0.37;
  VehicleState state{};
  MapKind branch = MapKind::kThrottle;
  double pedal = 0.0;
  double achieved = 0.0;  // command handed to the lag after the map round trip

  void validate() const;
};

constexpr double kCoastHysteresis = 0.05;  // m/s^2

/// Zero-pedal throttle acceleration at `velocity`.
double coast_threshold(const VehicleMaps& maps, double velocity);

/// Picks the branch with hysteresis around the coast threshold, inverts it to
/// a pedal, evaluates the forward map and applies the lag over dt.
EmpiricalVehicle step_empirical(const EmpiricalVehicle& vehicle, double u_desired, double dt);

}  // namespace platoon
