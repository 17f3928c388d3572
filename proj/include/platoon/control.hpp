#pragma once

#include <optional>
#include <string_view>

#include "platoon/channel.hpp"
#include "platoon/dynamics.hpp"

namespace platoon {

/// Feedback gains on predecessor acceleration, relative velocity and spacing error.
struct Gains {
  double k_a = 0.0;  // dimensionless
  double k_v = 1.0;  // 1/s
  double k_p = 1.0;  // 1/s^2

  void validate() const;
};

/// Constant time-headway spacing policy: desired gap d + h_w v.
struct SpacingPolicy {
  double h_w = 1.0;  // s
  double d = 5.0;    // m

  void validate() const;
};

enum class Scheme { kAcc, kCacc, kCaccPlus };

std::string_view to_string(Scheme scheme) noexcept;
std::optional<Scheme> parse_scheme(std::string_view text) noexcept;

/// e_i = x_i - x_{i-1} + d + h_w v_i.
double spacing_error(const VehicleState& ego, const VehicleState& pred,
                     const SpacingPolicy& policy);

/// One-predecessor law. Only the radioed acceleration is gated by the link;
/// relative position and velocity come from on-board radar. ACC is this law
/// with the link permanently down.
double cacc_input(const VehicleState& ego, const VehicleState& pred, LinkSample w_pred,
                  const Gains& gains, const SpacingPolicy& policy);

/// Two-predecessor law. The whole second-predecessor bracket travels by radio.
double cacc_plus_input(const VehicleState& ego, const VehicleState& pred1,
                       const VehicleState& pred2, LinkSample w1, LinkSample w2,
                       const Gains& gains, const SpacingPolicy& policy);

/// The first follower has a single predecessor in every scheme.
double first_follower_input(const VehicleState& ego, const VehicleState& lead, LinkSample w,
                            const Gains& gains, const SpacingPolicy& policy);

/// Expected-value variants: link flags replaced by reception rates.
double cacc_input_expected(const VehicleState& ego, const VehicleState& pred, double gamma,
                           const Gains& gains, const SpacingPolicy& policy);
double cacc_plus_input_expected(const VehicleState& ego, const VehicleState& pred1,
                                const VehicleState& pred2, double gamma, double mu,
                                const Gains& gains, const SpacingPolicy& policy);

/// Optional actuator limits on the commanded acceleration.
struct Saturation {
  bool enabled = false;
  double min_accel = -9.0;
  double max_accel = 4.0;

  double apply(double u) const;
};

// Minimum string-stable time headways.
double min_headway_acc(double tau);
double min_headway_cacc(double tau, double gamma, double k_a);
double min_headway_cacc_plus(double tau, double gamma, double k_a);
double min_headway_cacc_plus_mu(double tau, double gamma, double mu, double k_a);

}  // namespace platoon
