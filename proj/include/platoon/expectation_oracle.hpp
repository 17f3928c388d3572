#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "platoon/platoon_sim.hpp"

namespace platoon {

/// A = constant + sum_l w_l * coefficients[l], with independent
/// w_l ~ Bernoulli(probabilities[l]).
struct RandomMatrixSpec {
  Eigen::MatrixXd constant;
  std::vector<Eigen::MatrixXd> coefficients;
  std::vector<double> probabilities;
  std::vector<std::string> names;

  void validate() const;
  int variables() const { return static_cast<int>(coefficients.size()); }
  /// Matrix for the assignment whose bit l is w_l.
  Eigen::MatrixXd sample(std::uint64_t assignment) const;
  /// Entrywise expectation.
  Eigen::MatrixXd mean() const;
};

constexpr int kMaxEnumerationVariables = 20;

/// Platoon matrix A(w) with every link a Bernoulli variable: gamma for the
/// (i, i-1) links, mu for the (i, i-2) links.
RandomMatrixSpec spec_from_platoon(const PlatoonConfig& config, double gamma, double mu);

/// Three-vehicle CACC and CACC+ specs at the given parameters.
RandomMatrixSpec cacc_three_vehicle_spec(double tau, const Gains& gains, double h_w,
                                         double gamma);
RandomMatrixSpec cacc_plus_three_vehicle_spec(double tau, const Gains& gains, double h_w,
                                              double gamma, double mu);

/// sum over all 2^m assignments of Pr(assignment) * A(assignment)^k.
Eigen::MatrixXd exact_expected_power(const RandomMatrixSpec& spec, int k, int jobs = 1);

/// sum over all assignments of Pr(assignment) * exp(A(assignment) dt).
Eigen::MatrixXd exact_expected_exponential(const RandomMatrixSpec& spec, double dt,
                                           int jobs = 1);

struct MultilinearityCheck {
  bool holds = false;
  double frobenius_gap = 0.0;
};

constexpr double kMultilinearityTolerance = 1e-10;

MultilinearityCheck check_multilinearity(const RandomMatrixSpec& spec, int k, int jobs = 1);

/// Smallest k in [1, k_max] where the identity fails, if any.
std::optional<int> multilinearity_threshold(const RandomMatrixSpec& spec, int k_max);

struct MatrixEstimate {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd std_error;  // entrywise standard error of the mean
  int samples = 0;
};

/// Mean of exp(A dt) over n sampled assignments. Exponentials are computed
/// once per distinct assignment.
MatrixEstimate monte_carlo_expected_exponential(const RandomMatrixSpec& spec, double dt,
                                                int n, std::uint64_t seed = 0);

/// Mean of A^k over n sampled assignments.
MatrixEstimate monte_carlo_expected_power(const RandomMatrixSpec& spec, int k, int n,
                                          std::uint64_t seed = 0);

/// k-th power of a block lower-bidiagonal matrix with diagonal blocks `diag`
/// and sub-diagonal blocks `sub` (sub[i] sits at block (i + 1, i)), built by the
/// block recursion A_{i,k+1} = sub_i A_{i-1,k} + diag_i A_{i,k} rather than by
/// multiplying full matrices.
Eigen::MatrixXd block_bidiagonal_power(std::span<const Eigen::MatrixXd> diag,
                                       std::span<const Eigen::MatrixXd> sub, int k);

}  // namespace platoon
