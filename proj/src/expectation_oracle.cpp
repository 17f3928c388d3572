#include "platoon/expectation_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "parallel.hpp"
#include "platoon/error.hpp"

namespace platoon {
namespace {

constexpr std::uint64_t kChunks = 64;

double probability(const RandomMatrixSpec& spec, std::uint64_t assignment) {
  double p = 1.0;
  for (int l = 0; l < spec.variables(); ++l) {
    const double q = spec.probabilities[static_cast<std::size_t>(l)];
    p *= (assignment >> l) & 1u ? q : 1.0 - q;
  }
  return p;
}

Eigen::MatrixXd power(const Eigen::MatrixXd& a, int k) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) r = r * a;
  return r;
}

// Weighted sum over every assignment. Chunk boundaries do not depend on the
// worker count, and chunks are reduced in index order.
template <class F>
Eigen::MatrixXd enumerate(const RandomMatrixSpec& spec, int jobs, F&& term) {
  spec.validate();
  if (spec.variables() > kMaxEnumerationVariables) {
    throw Error(ErrorCode::kEnumerationLimit,
                std::to_string(spec.variables()) + " variables exceed the enumeration limit of " +
                    std::to_string(kMaxEnumerationVariables));
  }
  const std::uint64_t total = std::uint64_t{1} << spec.variables();
  const std::uint64_t chunks = std::min(total, kChunks);
  std::vector<Eigen::MatrixXd> partial(chunks);
  detail::parallel_for(chunks, jobs, [&](std::size_t c) {
    const std::uint64_t lo = total * c / chunks, hi = total * (c + 1) / chunks;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(spec.constant.rows(), spec.constant.cols());
    for (std::uint64_t s = lo; s < hi; ++s) {
      const double p = probability(spec, s);
      if (p == 0.0) continue;
      acc += p * term(spec.sample(s));
    }
    partial[c] = std::move(acc);
  });
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(spec.constant.rows(), spec.constant.cols());
  for (const auto& p : partial) sum += p;
  return sum;
}

template <class F>
MatrixEstimate sample_mean(const RandomMatrixSpec& spec, int n, std::uint64_t seed, F&& term) {
  spec.validate();
  if (n < 1) throw Error(ErrorCode::kInvalidInput, "monte carlo needs n >= 1");
  if (spec.variables() > 63) {
    throw Error(ErrorCode::kEnumerationLimit, "too many variables to key assignments");
  }
  std::mt19937_64 rng(seed);
  std::map<std::uint64_t, int> counts;
  for (int i = 0; i < n; ++i) {
    std::uint64_t s = 0;
    for (int l = 0; l < spec.variables(); ++l) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (u < spec.probabilities[static_cast<std::size_t>(l)]) s |= std::uint64_t{1} << l;
    }
    ++counts[s];
  }
  const auto rows = spec.constant.rows(), cols = spec.constant.cols();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& [s, count] : counts) {
    const Eigen::MatrixXd t = term(spec.sample(s));
    sum += count * t;
    sum_sq += count * t.cwiseProduct(t);
  }
  MatrixEstimate est;
  est.samples = n;
  est.mean = sum / n;
  if (n > 1) {
    const Eigen::MatrixXd var =
        ((sum_sq - n * est.mean.cwiseProduct(est.mean)) / (n - 1)).cwiseMax(0.0);
    est.std_error = (var / n).cwiseSqrt();
  } else {
    est.std_error = Eigen::MatrixXd::Zero(rows, cols);
  }
  return est;
}

}  // namespace

void RandomMatrixSpec::validate() const {
  if (constant.rows() != constant.cols() || constant.size() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "random matrix must be square and non-empty");
  }
  if (probabilities.size() != coefficients.size() ||
      (!names.empty() && names.size() != coefficients.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "variable lists have different lengths");
  }
  for (std::size_t l = 0; l < coefficients.size(); ++l) {
    if (coefficients[l].rows() != constant.rows() || coefficients[l].cols() != constant.cols()) {
      throw Error(ErrorCode::kDimensionMismatch, "coefficient matrix has the wrong shape");
    }
    if (!(probabilities[l] >= 0.0 && probabilities[l] <= 1.0)) {
      throw Error(ErrorCode::kInvalidInput, "variable probability must lie in [0, 1]");
    }
  }
}

Eigen::MatrixXd RandomMatrixSpec::sample(std::uint64_t assignment) const {
  Eigen::MatrixXd a = constant;
  for (int l = 0; l < variables(); ++l) {
    if ((assignment >> l) & 1u) a += coefficients[static_cast<std::size_t>(l)];
  }
  return a;
}

Eigen::MatrixXd RandomMatrixSpec::mean() const {
  Eigen::MatrixXd a = constant;
  for (int l = 0; l < variables(); ++l) {
    a += probabilities[static_cast<std::size_t>(l)] * coefficients[static_cast<std::size_t>(l)];
  }
  return a;
}

RandomMatrixSpec spec_from_platoon(const PlatoonConfig& config, double gamma, double mu) {
  config.validate();
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(mu >= 0.0 && mu <= 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "reception rates must lie in [0, 1]");
  }
  const int links = config.link_count();
  std::vector<double> w(static_cast<std::size_t>(links), 0.0);
  RandomMatrixSpec spec;
  spec.constant = build_system_matrix(config, w);
  for (int l = 0; l < links; ++l) {
    w.assign(w.size(), 0.0);
    w[static_cast<std::size_t>(l)] = 1.0;
    spec.coefficients.push_back(build_system_matrix(config, w) - spec.constant);
    const bool second = l >= config.n_followers;
    spec.probabilities.push_back(second ? mu : gamma);
    const int i = second ? l - config.n_followers + 2 : l + 1;
    spec.names.push_back("w" + std::to_string(i) + "," + std::to_string(second ? i - 2 : i - 1));
  }
  return spec;
}

RandomMatrixSpec cacc_three_vehicle_spec(double tau, const Gains& gains, double h_w,
                                         double gamma) {
  PlatoonConfig c;
  c.n_followers = 2;
  c.tau = tau;
  c.gains = gains;
  c.policy.h_w = h_w;
  c.scheme = Scheme::kCacc;
  return spec_from_platoon(c, gamma, gamma);
}

RandomMatrixSpec cacc_plus_three_vehicle_spec(double tau, const Gains& gains, double h_w,
                                              double gamma, double mu) {
  PlatoonConfig c;
  c.n_followers = 2;
  c.tau = tau;
  c.gains = gains;
  c.policy.h_w = h_w;
  c.scheme = Scheme::kCaccPlus;
  return spec_from_platoon(c, gamma, mu);
}

Eigen::MatrixXd exact_expected_power(const RandomMatrixSpec& spec, int k, int jobs) {
  if (k < 0) throw Error(ErrorCode::kInvalidInput, "exponent must be non-negative");
  return enumerate(spec, jobs, [k](const Eigen::MatrixXd& a) { return power(a, k); });
}

Eigen::MatrixXd exact_expected_exponential(const RandomMatrixSpec& spec, double dt, int jobs) {
  return enumerate(spec, jobs,
                   [dt](const Eigen::MatrixXd& a) { return Eigen::MatrixXd((a * dt).exp()); });
}

MultilinearityCheck check_multilinearity(const RandomMatrixSpec& spec, int k, int jobs) {
  const Eigen::MatrixXd exact = exact_expected_power(spec, k, jobs);
  const double gap = (exact - power(spec.mean(), k)).norm();
  return {gap < kMultilinearityTolerance, gap};
}

std::optional<int> multilinearity_threshold(const RandomMatrixSpec& spec, int k_max) {
  for (int k = 1; k <= k_max; ++k) {
    if (!check_multilinearity(spec, k).holds) return k;
  }
  return std::nullopt;
}

MatrixEstimate monte_carlo_expected_exponential(const RandomMatrixSpec& spec, double dt, int n,
                                                std::uint64_t seed) {
  return sample_mean(spec, n, seed,
                     [dt](const Eigen::MatrixXd& a) { return Eigen::MatrixXd((a * dt).exp()); });
}

MatrixEstimate monte_carlo_expected_power(const RandomMatrixSpec& spec, int k, int n,
                                          std::uint64_t seed) {
  if (k < 0) throw Error(ErrorCode::kInvalidInput, "exponent must be non-negative");
  return sample_mean(spec, n, seed, [k](const Eigen::MatrixXd& a) { return power(a, k); });
}

Eigen::MatrixXd block_bidiagonal_power(std::span<const Eigen::MatrixXd> diag,
                                       std::span<const Eigen::MatrixXd> sub, int k) {
  const std::size_t nb = diag.size();
  if (nb == 0 || sub.size() + 1 != nb) {
    throw Error(ErrorCode::kDimensionMismatch, "need one fewer sub-diagonal block than blocks");
  }
  const auto m = diag[0].rows();
  for (const auto& d : diag) {
    if (d.rows() != m || d.cols() != m) {
      throw Error(ErrorCode::kDimensionMismatch, "blocks must share one square size");
    }
  }
  for (const auto& s : sub) {
    if (s.rows() != m || s.cols() != m) {
      throw Error(ErrorCode::kDimensionMismatch, "blocks must share one square size");
    }
  }
  if (k < 0) throw Error(ErrorCode::kInvalidInput, "exponent must be non-negative");
  // p[i][j] holds block (i, j), i >= j, of the current power.
  std::vector<std::vector<Eigen::MatrixXd>> p(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    p[i].assign(i + 1, Eigen::MatrixXd::Zero(m, m));
    p[i][i].setIdentity();
  }
  for (int step = 0; step < k; ++step) {
    auto next = p;
    for (std::size_t i = 0; i < nb; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        next[i][j] = diag[i] * p[i][j];
        if (i > j) next[i][j] += sub[i - 1] * p[i - 1][j];
      }
    }
    p = std::move(next);
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m * static_cast<Eigen::Index>(nb),
                                              m * static_cast<Eigen::Index>(nb));
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      out.block(m * static_cast<Eigen::Index>(i), m * static_cast<Eigen::Index>(j), m, m) =
          p[i][j];
    }
  }
  return out;
}

}  // namespace platoon
