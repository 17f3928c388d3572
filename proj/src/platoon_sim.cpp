#include "platoon/platoon_sim.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>
#include <unordered_map>

#include <unsupported/Eigen/MatrixFunctions>

#include "parallel.hpp"
#include "platoon/error.hpp"

namespace platoon {
namespace {

constexpr int kMaxFollowers = 30;
constexpr int kDenseFollowers = 6;

void check_rate(double r, const char* name) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw Error(ErrorCode::kInvalidInput, std::string(name) + " must lie in [0, 1]");
  }
}

int second_link(int n_followers, int follower) { return n_followers + follower - 2; }

SimOutput make_output(const PlatoonConfig& config, std::size_t samples) {
  SimOutput out;
  const auto vehicles = static_cast<std::size_t>(config.n_followers + 1);
  out.time.resize(samples);
  out.x.assign(vehicles, std::vector<double>(samples));
  out.v.assign(vehicles, std::vector<double>(samples));
  out.a.assign(vehicles, std::vector<double>(samples));
  out.e.assign(vehicles - 1, std::vector<double>(samples));
  out.seed = config.master_seed;
  out.dt = config.grid.dt;
  for (std::size_t k = 0; k < samples; ++k) out.time[k] = config.grid.time(k);
  return out;
}

// Steady state at the maneuver's initial velocity: zero spacing errors.
std::vector<VehicleState> steady_state(const PlatoonConfig& config, double v0) {
  std::vector<VehicleState> s(static_cast<std::size_t>(config.n_followers + 1));
  s[0] = {0.0, v0, 0.0};
  for (std::size_t i = 1; i < s.size(); ++i) {
    s[i] = {s[i - 1].x - config.policy.d - config.policy.h_w * v0, v0, 0.0};
  }
  return s;
}

void guard(const SimOutput& out, std::size_t k, double limit) {
  for (std::size_t j = 0; j < out.x.size(); ++j) {
    const double vals[3] = {out.x[j][k], out.v[j][k], out.a[j][k]};
    for (double s : vals) {
      if (!std::isfinite(s) || std::abs(s) > limit) {
        throw DivergenceError(k, "state of vehicle " + std::to_string(j) +
                                     " left the divergence guard at step " +
                                     std::to_string(k));
      }
    }
  }
}

struct LinkSampler {
  std::vector<ChannelState> states;
  std::vector<double> weights;
  std::uint64_t key = 0;

  LinkSampler(const PlatoonConfig& config) : weights(config.link_count(), 1.0) {
    if (config.ideal_channel) return;
    for (int l = 0; l < config.link_count(); ++l) {
      states.push_back(ChannelState::make(config.link_params(l), config.master_seed,
                                          static_cast<std::uint64_t>(l), config.initial_mode));
    }
  }

  void sample(const PlatoonConfig& config) {
    key = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      bool received = true;
      if (!config.ideal_channel) {
        received = channel_step(states[l], config.link_params(static_cast<int>(l))).received;
      }
      weights[l] = received ? 1.0 : 0.0;
      if (received) key |= std::uint64_t{1} << l;
    }
  }
};

// Matrix engine: exact ZOH of the deviation from the steady-state motion.
// The steady-state motion solves the affine system, so the standstill term
// drops out and spacing errors are formed from small deviations.
SimOutput run_linear(const PlatoonConfig& config, const Maneuver& maneuver,
                     const ZohPropagator& prop, LinkSampler* sampler,
                     std::span<const double> fixed_weights) {
  const std::size_t steps = config.grid.steps();
  SimOutput out = make_output(config, steps + 1);
  const auto nominal = steady_state(config, maneuver.initial_velocity);
  const int n = 3 * (config.n_followers + 1);
  const double h = config.policy.h_w;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n + 1);

  Eigen::MatrixXd fixed_phi;
  if (!sampler && prop.dense()) fixed_phi = prop.transition(fixed_weights);

  auto record = [&](std::size_t k) {
    const double t = out.time[k];
    for (std::size_t j = 0; j < nominal.size(); ++j) {
      out.x[j][k] = nominal[j].x + nominal[j].v * t + z[3 * j];
      out.v[j][k] = nominal[j].v + z[3 * j + 1];
      out.a[j][k] = z[3 * j + 2];
      if (j > 0) out.e[j - 1][k] = (z[3 * j] - z[3 * (j - 1)]) + h * z[3 * j + 1];
    }
    guard(out, k, config.divergence_limit);
  };

  record(0);
  for (std::size_t k = 0; k < steps; ++k) {
    z[n] = maneuver.command_at(out.time[k]);
    if (sampler) {
      sampler->sample(config);
      prop.step(z, sampler->key, sampler->weights);
    } else if (prop.dense()) {
      z = fixed_phi * z;
    } else {
      z = prop.apply_series(fixed_weights, z);
    }
    record(k + 1);
  }
  return out;
}

// Per-vehicle engine for saturated commands or map-based vehicles.
SimOutput run_sampled(const PlatoonConfig& config, const Maneuver& maneuver,
                      LinkSampler* sampler, double gamma, double mu) {
  const std::size_t steps = config.grid.steps();
  SimOutput out = make_output(config, steps + 1);
  const int nf = config.n_followers;
  std::vector<VehicleState> s = steady_state(config, maneuver.initial_velocity);
  std::vector<EmpiricalVehicle> veh;
  if (config.model == VehicleModel::kMap) {
    for (const auto& st : s) veh.push_back({config.maps, config.tau, st});
  }
  const Gains& g = config.gains;
  const SpacingPolicy& p = config.policy;
  std::vector<double> u(s.size());

  auto record = [&](std::size_t k) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      out.x[j][k] = s[j].x;
      out.v[j][k] = s[j].v;
      out.a[j][k] = s[j].a;
      if (j > 0) out.e[j - 1][k] = spacing_error(s[j], s[j - 1], p);
    }
    guard(out, k, config.divergence_limit);
  };

  record(0);
  for (std::size_t k = 0; k < steps; ++k) {
    if (sampler) sampler->sample(config);
    u[0] = maneuver.command_at(out.time[k]);
    for (int i = 1; i <= nf; ++i) {
      const auto& ego = s[i];
      const auto& p1 = s[i - 1];
      double cmd = 0.0;
      if (config.scheme == Scheme::kAcc) {
        cmd = cacc_input_expected(ego, p1, 0.0, g, p);
      } else if (sampler) {
        const LinkSample w1{sampler->weights[i - 1] != 0.0};
        if (config.scheme == Scheme::kCaccPlus && i >= 2) {
          const LinkSample w2{sampler->weights[second_link(nf, i)] != 0.0};
          cmd = cacc_plus_input(ego, p1, s[i - 2], w1, w2, g, p);
        } else {
          cmd = cacc_input(ego, p1, w1, g, p);
        }
      } else if (config.scheme == Scheme::kCaccPlus && i >= 2) {
        cmd = cacc_plus_input_expected(ego, p1, s[i - 2], gamma, mu, g, p);
      } else {
        cmd = cacc_input_expected(ego, p1, gamma, g, p);
      }
      u[i] = config.saturation.apply(cmd);
    }
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (config.model == VehicleModel::kMap) {
        veh[j] = step_empirical(veh[j], u[j], config.grid.dt);
        s[j] = veh[j].state;
      } else {
        s[j] = step_lag(s[j], u[j], config.tau, config.grid.dt);
      }
      if (config.clamp_velocity && s[j].v < 0.0) {
        s[j].v = 0.0;
        s[j].a = std::max(0.0, s[j].a);
        if (config.model == VehicleModel::kMap) veh[j].state = s[j];
      }
    }
    record(k + 1);
  }
  return out;
}

bool matrix_engine(const PlatoonConfig& config) {
  return config.model == VehicleModel::kLinear && !config.saturation.enabled &&
         !config.clamp_velocity;
}

std::vector<double> expected_weights(const PlatoonConfig& config, double gamma, double mu) {
  std::vector<double> w(config.link_count(), gamma);
  for (int l = config.n_followers; l < config.link_count(); ++l) w[l] = mu;
  return w;
}

SimOutput run_stochastic(const PlatoonConfig& config, const Maneuver& maneuver,
                         const ZohPropagator* prop) {
  LinkSampler sampler(config);
  if (matrix_engine(config)) return run_linear(config, maneuver, *prop, &sampler, {});
  return run_sampled(config, maneuver, &sampler, 1.0, 1.0);
}

}  // namespace

void PlatoonConfig::validate() const {
  if (n_followers < 1 || n_followers > kMaxFollowers) {
    throw Error(ErrorCode::kInvalidInput,
                "n_followers must lie in [1, " + std::to_string(kMaxFollowers) + "]");
  }
  if (scheme == Scheme::kCaccPlus && n_followers < 2) {
    throw Error(ErrorCode::kInvalidInput,
                "CACC+ requires n_followers >= 2 for the two-predecessor law to engage");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::kInvalidInput, "tau must be positive");
  }
  gains.validate();
  policy.validate();
  (void)grid.steps();
  channel.validate();
  if (second_channel) second_channel->validate();
  if (!link_overrides.empty()) {
    if (static_cast<int>(link_overrides.size()) != link_count()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "link override count " + std::to_string(link_overrides.size()) +
                      " does not match the scheme's " + std::to_string(link_count()) +
                      " links");
    }
    for (const auto& l : link_overrides) l.validate();
  }
  if (deterministic_gamma) check_rate(*deterministic_gamma, "deterministic gamma");
  if (deterministic_mu) check_rate(*deterministic_mu, "deterministic mu");
  if (model == VehicleModel::kMap) {
    if (!maps) throw Error(ErrorCode::kInvalidInput, "map vehicle model needs maps");
    maps->validate();
  }
  if (saturation.enabled && !(saturation.min_accel < saturation.max_accel)) {
    throw Error(ErrorCode::kInvalidInput, "saturation limits are inverted");
  }
  if (!(divergence_limit > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "divergence limit must be positive");
  }
}

int PlatoonConfig::link_count() const {
  switch (scheme) {
    case Scheme::kAcc: return 0;
    case Scheme::kCacc: return n_followers;
    case Scheme::kCaccPlus: return 2 * n_followers - 1;
  }
  return 0;
}

const GilbertParams& PlatoonConfig::link_params(int link) const {
  if (link < 0 || link >= link_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "link index out of range");
  }
  if (!link_overrides.empty()) return link_overrides[static_cast<std::size_t>(link)];
  if (link >= n_followers && second_channel) return *second_channel;
  return channel;
}

double PlatoonConfig::platoon_gamma() const {
  if (ideal_channel) return 1.0;
  if (scheme == Scheme::kAcc) return gamma_of(channel);
  double g = 1.0;
  for (int l = 0; l < n_followers; ++l) g = std::min(g, gamma_of(link_params(l)));
  return g;
}

double PlatoonConfig::platoon_mu() const {
  if (ideal_channel) return 1.0;
  if (scheme != Scheme::kCaccPlus) return platoon_gamma();
  double m = 1.0;
  for (int l = n_followers; l < link_count(); ++l) m = std::min(m, gamma_of(link_params(l)));
  return m;
}

std::vector<double> SimOutput::peaks() const {
  std::vector<double> p(e.size(), 0.0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (double x : e[i]) p[i] = std::max(p[i], std::abs(x));
  }
  return p;
}

Eigen::MatrixXd build_system_matrix(const PlatoonConfig& config,
                                    std::span<const double> link_weights) {
  if (static_cast<int>(link_weights.size()) != config.link_count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected " + std::to_string(config.link_count()) + " link weights, got " +
                    std::to_string(link_weights.size()));
  }
  const int nf = config.n_followers;
  const int n = 3 * (nf + 1);
  const double tau = config.tau;
  const double ka = config.gains.k_a, kv = config.gains.k_v, kp = config.gains.k_p;
  const double h = config.policy.h_w;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j <= nf; ++j) {
    a(3 * j, 3 * j + 1) = 1.0;
    a(3 * j + 1, 3 * j + 2) = 1.0;
    a(3 * j + 2, 3 * j + 2) = -1.0 / tau;
  }
  for (int i = 1; i <= nf; ++i) {
    const int r = 3 * i + 2;
    const int q = 3 * (i - 1);
    const double w1 = config.scheme == Scheme::kAcc ? 0.0 : link_weights[i - 1];
    a(r, q + 2) = w1 * ka / tau;
    a(r, q + 1) = kv / tau;
    a(r, q) = kp / tau;
    if (config.scheme == Scheme::kCaccPlus && i >= 2) {
      const double w2 = link_weights[second_link(nf, i)];
      const int q2 = 3 * (i - 2);
      a(r, 3 * i) = -(kp + w2 * kp) / tau;
      a(r, 3 * i + 1) = -(kv + kp * h + w2 * (kv + 2.0 * kp * h)) / tau;
      a(r, q2) = w2 * kp / tau;
      a(r, q2 + 1) = w2 * kv / tau;
      a(r, q2 + 2) = w2 * ka / tau;
    } else {
      a(r, 3 * i) = -kp / tau;
      a(r, 3 * i + 1) = -(kv + kp * h) / tau;
    }
  }
  return a;
}

Eigen::VectorXd build_input_vector(const PlatoonConfig& config) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(3 * (config.n_followers + 1));
  b[2] = 1.0 / config.tau;
  return b;
}

struct ZohPropagator::Cache {
  mutable std::mutex mutex;
  std::unordered_map<std::uint64_t, Eigen::MatrixXd> phi;
};

ZohPropagator::ZohPropagator(const PlatoonConfig& config)
    : config_(config),
      dense_(config.n_followers <= kDenseFollowers),
      cache_(std::make_shared<Cache>()) {}

Eigen::MatrixXd ZohPropagator::augmented(std::span<const double> link_weights) const {
  const int n = 3 * (config_.n_followers + 1);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
  m.topLeftCorner(n, n) = build_system_matrix(config_, link_weights);
  m.topRightCorner(n, 1) = build_input_vector(config_);
  return m * config_.grid.dt;
}

Eigen::MatrixXd ZohPropagator::transition(std::span<const double> link_weights) const {
  return augmented(link_weights).exp();
}

Eigen::VectorXd ZohPropagator::apply_series(std::span<const double> link_weights,
                                            const Eigen::VectorXd& z) const {
  const Eigen::MatrixXd m = augmented(link_weights);
  const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
  const int substeps = std::max(1, static_cast<int>(std::ceil(norm / 0.5)));
  Eigen::VectorXd y = z;
  for (int s = 0; s < substeps; ++s) {
    Eigen::VectorXd term = y;
    Eigen::VectorXd sum = y;
    for (int k = 1; k <= 40; ++k) {
      term = m * term / (static_cast<double>(substeps) * k);
      sum += term;
      if (term.lpNorm<Eigen::Infinity>() <= 1e-18 * sum.lpNorm<Eigen::Infinity>()) break;
    }
    y = sum;
  }
  return y;
}

void ZohPropagator::step(Eigen::VectorXd& state, std::uint64_t pattern_key,
                         std::span<const double> link_weights) const {
  if (!dense_) {
    state = apply_series(link_weights, state);
    return;
  }
  const Eigen::MatrixXd* phi = nullptr;
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->phi.find(pattern_key);
    if (it != cache_->phi.end()) phi = &it->second;
  }
  if (!phi) {
    Eigen::MatrixXd fresh = transition(link_weights);
    std::lock_guard lock(cache_->mutex);
    phi = &cache_->phi.emplace(pattern_key, std::move(fresh)).first->second;
  }
  state = (*phi) * state;
}

std::size_t ZohPropagator::cached_patterns() const {
  std::lock_guard lock(cache_->mutex);
  return cache_->phi.size();
}

SimOutput simulate(const PlatoonConfig& config, const Maneuver& maneuver) {
  if (config.deterministic_gamma) {
    return simulate_deterministic(config, maneuver, *config.deterministic_gamma,
                                  config.deterministic_mu.value_or(*config.deterministic_gamma));
  }
  config.validate();
  maneuver.validate();
  const ZohPropagator prop(config);
  return run_stochastic(config, maneuver, &prop);
}

SimOutput simulate_deterministic(const PlatoonConfig& config, const Maneuver& maneuver,
                                 double gamma, double mu) {
  config.validate();
  maneuver.validate();
  check_rate(gamma, "gamma");
  check_rate(mu, "mu");
  if (!matrix_engine(config)) return run_sampled(config, maneuver, nullptr, gamma, mu);
  const ZohPropagator prop(config);
  const auto w = expected_weights(config, gamma, mu);
  return run_linear(config, maneuver, prop, nullptr, w);
}

EnsembleStats monte_carlo(const PlatoonConfig& config, const Maneuver& maneuver,
                          int n_realizations, int jobs) {
  if (n_realizations < 1) {
    throw Error(ErrorCode::kInvalidInput, "monte carlo needs at least one realization");
  }
  PlatoonConfig base = config;
  base.deterministic_gamma.reset();
  base.deterministic_mu.reset();
  base.validate();
  maneuver.validate();
  const ZohPropagator prop(base);
  const auto n = static_cast<std::size_t>(n_realizations);

  std::vector<std::vector<std::vector<double>>> errors(n);
  EnsembleStats stats;
  stats.n_realizations = n_realizations;
  stats.realization_peaks.resize(n);
  detail::parallel_for(n, jobs, [&](std::size_t r) {
    PlatoonConfig c = base;
    c.master_seed = base.master_seed + r;
    SimOutput out = run_stochastic(c, maneuver, &prop);
    stats.realization_peaks[r] = out.peaks();
    errors[r] = std::move(out.e);
  });

  const std::size_t nf = errors[0].size();
  const std::size_t samples = errors[0][0].size();
  stats.mean_e.assign(nf, std::vector<double>(samples, 0.0));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < nf; ++i) {
      for (std::size_t k = 0; k < samples; ++k) stats.mean_e[i][k] += errors[r][i][k];
    }
  }
  stats.peak_of_mean.assign(nf, 0.0);
  for (std::size_t i = 0; i < nf; ++i) {
    for (double& m : stats.mean_e[i]) {
      m /= static_cast<double>(n);
      stats.peak_of_mean[i] = std::max(stats.peak_of_mean[i], std::abs(m));
    }
  }
  stats.deterministic =
      simulate_deterministic(base, maneuver, base.platoon_gamma(), base.platoon_mu());
  stats.deterministic_peaks = stats.deterministic.peaks();
  for (std::size_t i = 0; i < nf; ++i) {
    for (std::size_t k = 0; k < samples; ++k) {
      stats.max_mean_gap = std::max(
          stats.max_mean_gap, std::abs(stats.mean_e[i][k] - stats.deterministic.e[i][k]));
    }
  }
  return stats;
}

StabilityVerdict empirical_string_stability(std::span<const double> peaks) {
  if (peaks.size() < 2) {
    throw Error(ErrorCode::kInvalidInput, "string stability needs at least two followers");
  }
  StabilityVerdict v{true, {peaks.begin(), peaks.end()}};
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    if (peaks[i] > peaks[i - 1] + 1e-6) v.stable = false;
  }
  return v;
}

StabilityVerdict empirical_string_stability(const SimOutput& out) {
  const auto p = out.peaks();
  return empirical_string_stability(std::span<const double>(p));
}

SeedSweep seed_sweep(const PlatoonConfig& config, const Maneuver& maneuver, int seeds,
                     int jobs) {
  if (seeds < 1) throw Error(ErrorCode::kInvalidInput, "seed sweep needs at least one seed");
  PlatoonConfig base = config;
  base.deterministic_gamma.reset();
  base.deterministic_mu.reset();
  base.validate();
  maneuver.validate();
  if (base.n_followers < 2) {
    throw Error(ErrorCode::kInvalidInput, "seed sweep needs at least two followers");
  }
  const ZohPropagator prop(base);
  std::vector<std::vector<double>> peaks(static_cast<std::size_t>(seeds));
  detail::parallel_for(peaks.size(), jobs, [&](std::size_t s) {
    PlatoonConfig c = base;
    c.master_seed = base.master_seed + s;
    peaks[s] = run_stochastic(c, maneuver, &prop).peaks();
  });
  SeedSweep sweep;
  sweep.seeds = seeds;
  for (const auto& p : peaks) {
    if (p.back() > p.front()) ++sweep.amplified;
    if (empirical_string_stability(std::span<const double>(p)).stable) ++sweep.string_stable;
  }
  return sweep;
}

}  // namespace platoon
