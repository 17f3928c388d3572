#include "platoon/control.hpp"

#include <algorithm>
#include <cmath>

#include "platoon/error.hpp"

namespace platoon {
namespace {

void check_rate(double p, const char* name) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw Error(ErrorCode::kInvalidInput, std::string(name) + " must lie in [0, 1]");
  }
}

void check_lag(double tau) {
  if (!std::isfinite(tau) || tau < 0.0) {
    throw Error(ErrorCode::kInvalidInput, "tau must be non-negative");
  }
}

void check_ka(double k_a) {
  if (!std::isfinite(k_a) || k_a < 0.0) {
    throw Error(ErrorCode::kInvalidInput, "k_a must be non-negative");
  }
}

// Bracket shared by the one- and two-predecessor laws for a predecessor
// `hops` vehicles ahead.
double relative_terms(const VehicleState& ego, const VehicleState& pred, int hops,
                      const Gains& g, const SpacingPolicy& p) {
  return -g.k_v * (ego.v - pred.v) - g.k_p * (ego.x - pred.x + hops * (p.d + p.h_w * ego.v));
}

}  // namespace

void Gains::validate() const {
  if (!std::isfinite(k_a) || !std::isfinite(k_v) || !std::isfinite(k_p) || k_a < 0.0 ||
      !(k_v > 0.0) || !(k_p > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "gains need k_a >= 0, k_v > 0, k_p > 0");
  }
}

void SpacingPolicy::validate() const {
  if (!std::isfinite(h_w) || !std::isfinite(d) || !(h_w > 0.0) || d < 0.0) {
    throw Error(ErrorCode::kInvalidInput, "spacing policy needs h_w > 0 and d >= 0");
  }
}

std::string_view to_string(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::kAcc: return "acc";
    case Scheme::kCacc: return "cacc";
    case Scheme::kCaccPlus: return "cacc_plus";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view text) noexcept {
  if (text == "acc" || text == "ACC") return Scheme::kAcc;
  if (text == "cacc" || text == "CACC") return Scheme::kCacc;
  if (text == "cacc_plus" || text == "cacc+" || text == "CACC+" || text == "CACCPlus") {
    return Scheme::kCaccPlus;
  }
  return std::nullopt;
}

double spacing_error(const VehicleState& ego, const VehicleState& pred,
                     const SpacingPolicy& policy) {
  return ego.x - pred.x + policy.d + policy.h_w * ego.v;
}

double cacc_input(const VehicleState& ego, const VehicleState& pred, LinkSample w_pred,
                  const Gains& gains, const SpacingPolicy& policy) {
  const double feedforward = w_pred.received ? gains.k_a * pred.a : 0.0;
  return feedforward + relative_terms(ego, pred, 1, gains, policy);
}

double cacc_plus_input(const VehicleState& ego, const VehicleState& pred1,
                       const VehicleState& pred2, LinkSample w1, LinkSample w2,
                       const Gains& gains, const SpacingPolicy& policy) {
  const double one_hop = cacc_input(ego, pred1, w1, gains, policy);
  if (!w2.received) return one_hop;
  return one_hop + (gains.k_a * pred2.a + relative_terms(ego, pred2, 2, gains, policy));
}

double first_follower_input(const VehicleState& ego, const VehicleState& lead, LinkSample w,
                            const Gains& gains, const SpacingPolicy& policy) {
  return cacc_input(ego, lead, w, gains, policy);
}

double cacc_input_expected(const VehicleState& ego, const VehicleState& pred, double gamma,
                           const Gains& gains, const SpacingPolicy& policy) {
  return gamma * gains.k_a * pred.a + relative_terms(ego, pred, 1, gains, policy);
}

double cacc_plus_input_expected(const VehicleState& ego, const VehicleState& pred1,
                                const VehicleState& pred2, double gamma, double mu,
                                const Gains& gains, const SpacingPolicy& policy) {
  return cacc_input_expected(ego, pred1, gamma, gains, policy) +
         mu * (gains.k_a * pred2.a + relative_terms(ego, pred2, 2, gains, policy));
}

double Saturation::apply(double u) const {
  if (!enabled) return u;
  return std::clamp(u, min_accel, max_accel);
}

double min_headway_acc(double tau) {
  check_lag(tau);
  return 2.0 * tau;
}

double min_headway_cacc(double tau, double gamma, double k_a) {
  check_lag(tau);
  check_rate(gamma, "gamma");
  check_ka(k_a);
  return 2.0 * tau / (1.0 + gamma * k_a);
}

double min_headway_cacc_plus(double tau, double gamma, double k_a) {
  return min_headway_cacc_plus_mu(tau, gamma, gamma, k_a);
}

double min_headway_cacc_plus_mu(double tau, double gamma, double mu, double k_a) {
  check_lag(tau);
  check_rate(gamma, "gamma");
  check_rate(mu, "mu");
  check_ka(k_a);
  return 2.0 * tau * (1.0 + gamma) / ((1.0 + 2.0 * mu) * (1.0 + gamma * (1.0 + mu) * k_a));
}

}  // namespace platoon
