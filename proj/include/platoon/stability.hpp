#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "platoon/control.hpp"
#include "platoon/transfer_function.hpp"

namespace platoon {

/// Spacing-error propagation H(s) = E_i / E_{i-1} of the expected-value
/// one-predecessor platoon (gamma = 0 gives ACC).
RationalTF build_cacc_tf(const Gains& gains, double tau, double h_w, double gamma);

/// (H_p1, H_p2) of the expected-value two-predecessor platoon.
std::pair<RationalTF, RationalTF> build_cacc_plus_tfs(const Gains& gains, double tau,
                                                      double h_w, double gamma);
/// Same with a distinct reception rate mu on the second-predecessor link.
std::pair<RationalTF, RationalTF> build_cacc_plus_tfs(const Gains& gains, double tau,
                                                      double h_w, double gamma, double mu);

/// Transfer from lead acceleration to the first follower's spacing error.
RationalTF build_lead_error_tf(const Gains& gains, double tau, double h_w, double gamma);

/// sup over w >= 0 of |tf(jw)|. Log sweep on [1e-3, 1e3] with 4000 points,
/// w = 0 and the w -> infinity limit, then golden-section refinement of each
/// local maximum. Throws kUnstableTransferFunction for a non-Hurwitz denominator.
double hinf_norm(const RationalTF& tf);

/// Same sweep for an arbitrary non-negative gain curve.
double frequency_sup(const std::function<double(double)>& gain, double high_frequency_limit);

struct SumCondition {
  bool stable = false;
  double margin = 0.0;  // 1 - sum of norms
  std::vector<double> norms;
};

/// sum_k ||H_k||_inf <= 1 (single TF reduces to ||H||_inf <= 1).
SumCondition string_stable_sum(const std::vector<RationalTF>& tfs);

/// Integral of |h(t)| for the impulse response, plus |D| for a biproper tf.
/// Steps on `dt` at least up to `horizon`, then continues until a certified
/// tail bound drops below 1e-6.
double impulse_l1_norm(const RationalTF& tf, double horizon, double dt);

/// Solves A X + X A^T + Q = 0 by a dense solve on the vectorised equation.
/// Throws kNoSolution when A is not Hurwitz.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q);

/// Controllability Gramian P: A P + P A^T + B B^T = 0. Passing B = [B1 B2]
/// gives the two-predecessor variant.
Eigen::MatrixXd lyapunov_gramian(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Error dynamics in first-order form:
///   zeta_1' = A zeta_1 + D_in w0,  zeta_i' = A zeta_i + B [y_{i-1}; y_{i-2}],  y = C zeta.
/// B has one column per predecessor.
struct StateSpace {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd c;
  Eigen::MatrixXd d_in;

  void validate() const;
};

/// Realisation of the expected-value error dynamics for `scheme`. For the
/// two-predecessor scheme the state stacks the first follower's own
/// one-predecessor realisation with the two-predecessor realisation, so the
/// first follower is driven by the lead while followers further back only see
/// spacing errors.
StateSpace error_state_space(Scheme scheme, const Gains& gains, double tau, double h_w,
                             double gamma, double mu);

struct PeakBound {
  double j_value = 0.0;     // max eig of C P C^T
  double m1 = 0.0;          // m, already scaled by alpha_star
  double m2 = 0.0;          // multiplies ||w0||_2
  double alpha_star = 0.0;
  double beta2 = 0.0;       // initial state -> L2 output
  double gamma2 = 0.0;      // L2 gain lead input -> first follower error
  double eta = 0.0;         // initial state -> Linf output
  double j_lead = 0.0;      // L2 -> Linf gain^2 of the lead path
  double w0_l2 = 0.0;
  double peak = 0.0;        // m1 + m2 * w0_l2

  double bound(double w0_norm) const { return m1 + m2 * w0_norm; }
};

/// Uniform bound ||y_i||_inf <= M1 + M2 ||w0||_2 from the controllability
/// Gramian. With one predecessor column: M1 = (sqrt(J) beta2 + eta) alpha*,
/// M2 = sqrt(J) gamma2. With two: M1 = 2 sqrt(J) beta2 alpha*, M2 = 2 sqrt(J) gamma2.
/// M2 is never below the first follower's own L2 -> Linf gain sqrt(j_lead).
PeakBound peak_output_bound(const StateSpace& ss, double alpha_star, double w0_l2);

/// Standstill distance that covers the worst spacing error.
double safe_standstill_distance(const PeakBound& bound, double w0_l2, double margin = 0.0);

}  // namespace platoon
