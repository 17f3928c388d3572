#include "platoon/map_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <boost/algorithm/string.hpp>

#include "platoon/error.hpp"

namespace platoon {
namespace {

void require_ascending(const std::vector<double>& axis, const char* name) {
  if (axis.size() < 2) {
    throw Error(ErrorCode::kMalformedMap, std::string(name) + " axis needs two breakpoints");
  }
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!std::isfinite(axis[i])) {
      throw Error(ErrorCode::kMalformedMap, std::string(name) + " axis is not finite");
    }
    if (i > 0 && !(axis[i] > axis[i - 1])) {
      throw Error(ErrorCode::kMalformedMap,
                  std::string(name) + " axis is not strictly ascending");
    }
  }
}

// Cell index and local coordinate in [0, 1] after clamping.
std::pair<std::size_t, double> locate(const std::vector<double>& axis, double q) {
  if (!(q > axis.front())) return {0, 0.0};
  if (!(q < axis.back())) return {axis.size() - 2, 1.0};
  const auto it = std::upper_bound(axis.begin(), axis.end(), q);
  const std::size_t i = static_cast<std::size_t>(it - axis.begin()) - 1;
  return {i, (q - axis[i]) / (axis[i + 1] - axis[i])};
}

double parse_cell(const std::string& text, std::size_t row, std::size_t col) {
  const std::string t = boost::algorithm::trim_copy(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error(ErrorCode::kMalformedMap, "map CSV cell (" + std::to_string(row) + ", " +
                                              std::to_string(col) + ") is not a number: '" +
                                              t + "'");
  }
  return value;
}

std::vector<double> default_axis(double lo, double hi, double step) {
  std::vector<double> axis;
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= n; ++i) axis.push_back(lo + step * i);
  return axis;
}

}  // namespace

void PedalMap::validate() const {
  require_ascending(pedal, "pedal");
  require_ascending(velocity, "velocity");
  if (pedal.front() < 0.0 || pedal.back() > 1.0) {
    throw Error(ErrorCode::kMalformedMap, "pedal axis must lie in [0, 1]");
  }
  if (accel.size() != pedal.size() * velocity.size()) {
    throw Error(ErrorCode::kMalformedMap, "map grid size does not match its axes");
  }
  for (double a : accel) {
    if (!std::isfinite(a)) throw Error(ErrorCode::kMalformedMap, "map grid is not finite");
  }
}

double interp(const PedalMap& map, double pedal, double velocity) {
  if (map.accel.size() != map.pedal.size() * map.velocity.size() || map.pedal.size() < 2 ||
      map.velocity.size() < 2) {
    throw Error(ErrorCode::kMalformedMap, "map grid size does not match its axes");
  }
  if (std::isnan(pedal) || std::isnan(velocity)) {
    throw Error(ErrorCode::kInvalidInput, "map query is NaN");
  }
  const auto [i, s] = locate(map.pedal, pedal);
  const auto [j, t] = locate(map.velocity, velocity);
  const double f00 = map.node(i, j), f01 = map.node(i, j + 1);
  const double f10 = map.node(i + 1, j), f11 = map.node(i + 1, j + 1);
  return (1.0 - s) * ((1.0 - t) * f00 + t * f01) + s * ((1.0 - t) * f10 + t * f11);
}

double invert_pedal(const PedalMap& map, MapKind kind, double velocity, double target) {
  const std::size_t n = map.pedal.size();
  std::vector<double> slice(n);
  for (std::size_t i = 0; i < n; ++i) slice[i] = interp(map, map.pedal[i], velocity);
  const double sign = kind == MapKind::kThrottle ? 1.0 : -1.0;
  for (std::size_t i = 1; i < n; ++i) {
    if (!(sign * (slice[i] - slice[i - 1]) > 0.0)) {
      throw Error(ErrorCode::kInversion,
                  std::string(kind == MapKind::kThrottle ? "throttle" : "brake") +
                      " map is not strictly monotone in pedal at v = " +
                      std::to_string(velocity));
    }
  }
  if (std::isnan(target)) throw Error(ErrorCode::kInvalidInput, "map target is NaN");
  // Work on the increasing orientation sign * slice.
  const double goal = sign * target;
  if (!(goal > sign * slice.front())) return map.pedal.front();
  if (!(goal < sign * slice.back())) return map.pedal.back();
  std::size_t lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (sign * slice[mid] <= goal) lo = mid; else hi = mid;
  }
  const double f0 = sign * slice[lo], f1 = sign * slice[hi];
  const double r = (goal - f0) / (f1 - f0);
  return map.pedal[lo] + r * (map.pedal[hi] - map.pedal[lo]);
}

PedalMap read_pedal_map_csv(std::istream& in) {
  PedalMap map;
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> cells;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (boost::algorithm::trim_copy(line).empty()) continue;
    boost::algorithm::split(cells, line, boost::is_any_of(","));
    if (row == 0) {
      if (boost::algorithm::trim_copy(cells[0]) != "pedal") {
        throw Error(ErrorCode::kMalformedMap, "map CSV header must start with 'pedal'");
      }
      for (std::size_t c = 1; c < cells.size(); ++c) {
        map.velocity.push_back(parse_cell(cells[c], row, c));
      }
    } else {
      if (cells.size() != map.velocity.size() + 1) {
        throw Error(ErrorCode::kMalformedMap,
                    "map CSV row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(map.velocity.size() + 1));
      }
      map.pedal.push_back(parse_cell(cells[0], row, 0));
      for (std::size_t c = 1; c < cells.size(); ++c) {
        map.accel.push_back(parse_cell(cells[c], row, c));
      }
    }
    ++row;
  }
  if (row == 0) throw Error(ErrorCode::kMalformedMap, "map CSV is empty");
  map.validate();
  return map;
}

PedalMap load_pedal_map_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open map file " + path);
  return read_pedal_map_csv(in);
}

void write_pedal_map_csv(std::ostream& out, const PedalMap& map) {
  auto put = [&out](double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    out.write(buf, res.ptr - buf);
  };
  out << "pedal";
  for (double v : map.velocity) { out << ','; put(v); }
  out << '\n';
  for (std::size_t i = 0; i < map.pedal.size(); ++i) {
    put(map.pedal[i]);
    for (std::size_t j = 0; j < map.velocity.size(); ++j) { out << ','; put(map.node(i, j)); }
    out << '\n';
  }
}

void VehicleMaps::validate() const {
  throttle.validate();
  brake.validate();
  for (double a : brake.accel) {
    if (a > 1e-12) throw Error(ErrorCode::kMalformedMap, "brake map has positive entries");
  }
}

VehicleMaps synthetic_maps(const SyntheticMapParams& p) {
  VehicleMaps maps;
  const auto pedal = p.pedal_axis.empty() ? default_axis(0.0, 1.0, 0.05) : p.pedal_axis;
  const auto velocity = p.velocity_axis.empty() ? default_axis(0.0, 40.0, 2.5) : p.velocity_axis;
  auto shape = [&](double x) {
    if (p.curvature <= 0.0) return x;
    return -std::expm1(-p.curvature * x) / -std::expm1(-p.curvature);
  };
  auto drag = [&](double v) { return p.drag_linear * v + p.drag_quadratic * v * v; };
  for (auto* m : {&maps.throttle, &maps.brake}) {
    m->pedal = pedal;
    m->velocity = velocity;
    m->accel.resize(pedal.size() * velocity.size());
  }
  for (std::size_t i = 0; i < pedal.size(); ++i) {
    for (std::size_t j = 0; j < velocity.size(); ++j) {
      const double v = velocity[j];
      const double power = 1.0 / (1.0 + v / p.speed_falloff);
      maps.throttle.accel[i * velocity.size() + j] =
          p.throttle_max * shape(pedal[i]) * power - drag(v);
      maps.brake.accel[i * velocity.size() + j] = -drag(v) - p.brake_max * shape(pedal[i]);
    }
  }
  maps.validate();
  return maps;
}

VehicleMaps affine_maps(double c0, double c1, double throttle_slope, double brake_slope,
                        const std::vector<double>& pedal_axis,
                        const std::vector<double>& velocity_axis) {
  VehicleMaps maps;
  for (auto* m : {&maps.throttle, &maps.brake}) {
    m->pedal = pedal_axis;
    m->velocity = velocity_axis;
    m->accel.resize(pedal_axis.size() * velocity_axis.size());
  }
  for (std::size_t i = 0; i < pedal_axis.size(); ++i) {
    for (std::size_t j = 0; j < velocity_axis.size(); ++j) {
      const double base = c0 + c1 * velocity_axis[j];
      maps.throttle.accel[i * velocity_axis.size() + j] = base + throttle_slope * pedal_axis[i];
      maps.brake.accel[i * velocity_axis.size() + j] = base - brake_slope * pedal_axis[i];
    }
  }
  maps.throttle.validate();
  maps.brake.validate();
  return maps;
}

void EmpiricalVehicle::validate() const {
  if (!maps) throw Error(ErrorCode::kInvalidInput, "empirical vehicle has no maps");
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::kInvalidInput, "empirical vehicle needs tau > 0");
  }
}

double coast_threshold(const VehicleMaps& maps, double velocity) {
  return interp(maps.throttle, maps.throttle.pedal.front(), velocity);
}

EmpiricalVehicle step_empirical(const EmpiricalVehicle& vehicle, double u_desired, double dt) {
  vehicle.validate();
  if (!std::isfinite(u_desired)) {
    throw Error(ErrorCode::kInvalidInput, "desired acceleration is not finite");
  }
  EmpiricalVehicle next = vehicle;
  const double v = vehicle.state.v;
  const double coast = coast_threshold(*vehicle.maps, v);
  if (next.branch == MapKind::kThrottle && u_desired < coast - kCoastHysteresis) {
    next.branch = MapKind::kBrake;
  } else if (next.branch == MapKind::kBrake && u_desired > coast + kCoastHysteresis) {
    next.branch = MapKind::kThrottle;
  }
  const PedalMap& map =
      next.branch == MapKind::kThrottle ? vehicle.maps->throttle : vehicle.maps->brake;
  next.pedal = invert_pedal(map, next.branch, v, u_desired);
  next.achieved = interp(map, next.pedal, v);
  next.state = step_lag(vehicle.state, next.achieved, vehicle.tau, dt);
  return next;
}

}  // namespace platoon
