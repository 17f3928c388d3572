#include "platoon/channel.hpp"

#include <algorithm>
#include <cmath>

#include "platoon/error.hpp"

namespace platoon {
namespace {

bool unit_interval(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

}  // namespace

void GilbertParams::validate() const {
  if (!unit_interval(p_gb) || !unit_interval(q_bg) || !unit_interval(r_recv_bad)) {
    throw Error(ErrorCode::kInvalidInput, "Gilbert probabilities must lie in [0, 1]");
  }
  if (!(p_gb + q_bg > 0.0)) {
    throw Error(ErrorCode::kUndefinedRate, "Gilbert p_gb + q_bg must be positive");
  }
}

double GilbertParams::stationary_bad() const {
  validate();
  return p_gb / (p_gb + q_bg);
}

double gamma_of(const GilbertParams& params) {
  params.validate();
  return 1.0 - params.p_gb * (1.0 - params.r_recv_bad) / (params.p_gb + params.q_bg);
}

std::uint64_t link_seed(std::uint64_t master_seed, std::uint64_t link_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(link_index),
                    static_cast<std::uint32_t>(link_index >> 32), 0x6c696e6bu};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

ChannelState::ChannelState(ChannelMode mode, std::uint64_t seed) : mode_(mode), rng_(seed) {}

ChannelState ChannelState::make(const GilbertParams& params, std::uint64_t master_seed,
                                std::uint64_t link_index, InitialMode initial) {
  params.validate();
  ChannelState state(ChannelMode::kGood, link_seed(master_seed, link_index));
  if (initial == InitialMode::kStationary) {
    // Always consume one draw so the stream position does not depend on the mode policy.
    const double u = state.uniform();
    if (u < params.stationary_bad()) state.mode_ = ChannelMode::kBad;
  }
  return state;
}

double ChannelState::uniform() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

LinkSample channel_step(ChannelState& state, const GilbertParams& params) {
  const double transition = state.uniform();
  const double reception = state.uniform();
  if (state.mode_ == ChannelMode::kGood) {
    if (transition < params.p_gb) state.mode_ = ChannelMode::kBad;
  } else {
    if (transition < params.q_bg) state.mode_ = ChannelMode::kGood;
  }
  if (state.mode_ == ChannelMode::kGood) return LinkSample{true};
  return LinkSample{reception < params.r_recv_bad};
}

double estimate_gamma(std::span<const LinkSample> samples, std::size_t window) {
  if (window == 0) {
    throw Error(ErrorCode::kInvalidInput, "estimate_gamma: window must be >= 1");
  }
  if (samples.size() < window) {
    throw Error(ErrorCode::kInsufficientData, "estimate_gamma: fewer samples than the window");
  }
  std::size_t received = 0;
  for (const auto& s : samples.last(window)) received += s.received ? 1 : 0;
  return static_cast<double>(received) / static_cast<double>(window);
}

double platoon_gamma(std::span<const double> link_estimates) {
  if (link_estimates.empty()) {
    throw Error(ErrorCode::kInvalidInput, "platoon_gamma: no link estimates");
  }
  for (double g : link_estimates) {
    if (!unit_interval(g)) {
      throw Error(ErrorCode::kInvalidInput, "platoon_gamma: estimates must lie in [0, 1]");
    }
  }
  return *std::min_element(link_estimates.begin(), link_estimates.end());
}

}  // namespace platoon
