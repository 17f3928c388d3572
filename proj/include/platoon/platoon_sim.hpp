#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "platoon/channel.hpp"
#include "platoon/control.hpp"
#include "platoon/dynamics.hpp"
#include "platoon/map_model.hpp"

namespace platoon {

enum class VehicleModel { kLinear, kMap };

struct PlatoonConfig {
  int n_followers = 6;
  double tau = 0.4;
  Gains gains{};
  SpacingPolicy policy{};
  Scheme scheme = Scheme::kCacc;
  TimeGrid grid{};

  // Channel of every (i, i-1) link; the (i, i-2) links use `second_channel`
  // when set. `link_overrides`, when non-empty, replaces both per link index.
  GilbertParams channel{0.0, 1.0, 1.0};
  std::optional<GilbertParams> second_channel;
  std::vector<GilbertParams> link_overrides;
  bool ideal_channel = false;  // every packet arrives
  InitialMode initial_mode = InitialMode::kStationary;
  std::uint64_t master_seed = 0;

  // When set, run the expected-value system instead of sampling links.
  std::optional<double> deterministic_gamma;
  std::optional<double> deterministic_mu;

  VehicleModel model = VehicleModel::kLinear;
  std::shared_ptr<const VehicleMaps> maps;
  Saturation saturation{};
  bool clamp_velocity = false;  // hold v >= 0 (standstill)
  double divergence_limit = 1e6;

  void validate() const;

  /// Number of directed V2V links. Link i-1 carries (i, i-1); link
  /// n_followers + i - 2 carries (i, i-2).
  int link_count() const;
  const GilbertParams& link_params(int link) const;
  /// Platoon reception rates: min over (i, i-1) links and over (i, i-2) links.
  double platoon_gamma() const;
  double platoon_mu() const;
};

/// Per-vehicle time series. Vehicle 0 is the lead; `e[i-1]` is follower i.
struct SimOutput {
  std::vector<double> time;
  std::vector<std::vector<double>> x, v, a;
  std::vector<std::vector<double>> e;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::string scenario_id;
  std::string config_hash;

  int followers() const { return static_cast<int>(e.size()); }
  /// ||e_i||_inf over the horizon for each follower.
  std::vector<double> peaks() const;
};

/// A(w) in state order (x_0, v_0, a_0, ..., x_N, v_N, a_N). `link_weights`
/// holds one entry per link (0/1 for sampled links, expectations otherwise).
Eigen::MatrixXd build_system_matrix(const PlatoonConfig& config,
                                    std::span<const double> link_weights);

/// Lead input column: only a_0' receives u_L / tau.
Eigen::VectorXd build_input_vector(const PlatoonConfig& config);

/// Exact ZOH propagation of the deviation state for a fixed link pattern.
/// Dense exponentials are memoised per pattern for platoons of at most six
/// followers; larger platoons apply the exponential to the state by a scaled
/// Taylor series instead of forming it.
class ZohPropagator {
 public:
  explicit ZohPropagator(const PlatoonConfig& config);

  bool dense() const noexcept { return dense_; }
  /// Advances `state` (deviation state with the held input appended) by one step.
  void step(Eigen::VectorXd& state, std::uint64_t pattern_key,
            std::span<const double> link_weights) const;

  /// exp(M dt) for the augmented matrix of these weights (no caching).
  Eigen::MatrixXd transition(std::span<const double> link_weights) const;
  /// Action exp(M dt) z without forming the exponential.
  Eigen::VectorXd apply_series(std::span<const double> link_weights,
                               const Eigen::VectorXd& z) const;
  std::size_t cached_patterns() const;

 private:
  Eigen::MatrixXd augmented(std::span<const double> link_weights) const;
  struct Cache;
  PlatoonConfig config_;
  bool dense_;
  std::shared_ptr<Cache> cache_;
};

/// Stochastic run: every link is sampled once per controller step.
SimOutput simulate(const PlatoonConfig& config, const Maneuver& maneuver);

/// Expected-value run with fixed reception rates.
SimOutput simulate_deterministic(const PlatoonConfig& config, const Maneuver& maneuver,
                                 double gamma, double mu);

struct EnsembleStats {
  int n_realizations = 0;
  std::vector<std::vector<double>> mean_e;              // [follower][k]
  std::vector<std::vector<double>> realization_peaks;   // [realization][follower]
  std::vector<double> peak_of_mean;                     // per follower
  std::vector<double> deterministic_peaks;              // per follower
  SimOutput deterministic;
  /// max over t and followers of |mean e - deterministic e|.
  double max_mean_gap = 0.0;
};

/// Seeds master_seed + r for r in [0, n). Reduction is in index order, so
/// the result does not depend on `jobs`.
EnsembleStats monte_carlo(const PlatoonConfig& config, const Maneuver& maneuver,
                          int n_realizations, int jobs = 1);

struct StabilityVerdict {
  bool stable = false;
  std::vector<double> peaks;
};

/// Peaks must be non-increasing down the platoon within 1e-6 m.
StabilityVerdict empirical_string_stability(const SimOutput& out);
StabilityVerdict empirical_string_stability(std::span<const double> peaks);

struct SeedSweep {
  int seeds = 0;
  int amplified = 0;      // ||e_last|| > ||e_1||
  int string_stable = 0;  // empirical verdict true
  double amplified_fraction() const { return seeds ? double(amplified) / seeds : 0.0; }
  double stable_fraction() const { return seeds ? double(string_stable) / seeds : 0.0; }
};

/// Stochastic runs with seeds master_seed + s, s in [0, seeds).
SeedSweep seed_sweep(const PlatoonConfig& config, const Maneuver& maneuver, int seeds,
                     int jobs = 1);

}  // namespace platoon
