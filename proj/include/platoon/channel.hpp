#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace platoon {

/// Two-state Gilbert burst-loss parameters, all per controller step.
struct GilbertParams {
  double p_gb = 0.0;        // Good -> Bad
  double q_bg = 1.0;        // Bad -> Good
  double r_recv_bad = 1.0;  // reception probability while Bad

  void validate() const;
  /// Long-run fraction of steps spent in the Bad state.
  double stationary_bad() const;
};

enum class ChannelMode { kGood, kBad };

struct LinkSample {
  bool received = true;
};

/// Long-run packet reception rate 1 - P(1 - R) / (P + Q).
double gamma_of(const GilbertParams& params);

/// How the first mode of a link is chosen.
enum class InitialMode { kStationary, kGood };

/// Mutable state of one directed V2V link. Single owner; links never share
/// a random stream.
class ChannelState {
 public:
  ChannelState(ChannelMode mode, std::uint64_t seed);

  /// Draws the initial mode from the stationary distribution (or Good).
  static ChannelState make(const GilbertParams& params, std::uint64_t master_seed,
                           std::uint64_t link_index,
                           InitialMode initial = InitialMode::kStationary);

  ChannelMode mode() const noexcept { return mode_; }
  /// Uniform draw in [0, 1) with 53 random bits; platform independent.
  double uniform();

 private:
  friend LinkSample channel_step(ChannelState&, const GilbertParams&);
  ChannelMode mode_;
  std::mt19937_64 rng_;
};

/// Transitions the mode, then samples reception for this step.
LinkSample channel_step(ChannelState& state, const GilbertParams& params);

/// Mean of the trailing `window` samples.
double estimate_gamma(std::span<const LinkSample> samples, std::size_t window);

/// Platoon-wide rate: the smallest per-link estimate.
double platoon_gamma(std::span<const double> link_estimates);

/// Seed of link `link_index` derived from the master seed.
std::uint64_t link_seed(std::uint64_t master_seed, std::uint64_t link_index);

}  // namespace platoon
