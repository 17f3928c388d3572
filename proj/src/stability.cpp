#include "platoon/stability.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "platoon/error.hpp"

namespace platoon {
namespace {

constexpr double kSweepLow = 1e-3;
constexpr double kSweepHigh = 1e3;
constexpr int kSweepPoints = 4000;
constexpr double kGolden = 0.6180339887498949;

void check_tf_inputs(const Gains& gains, double tau, double h_w, double gamma) {
  gains.validate();
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::kInvalidInput, "tau must be positive");
  }
  if (!(h_w > 0.0) || !std::isfinite(h_w)) {
    throw Error(ErrorCode::kInvalidInput, "h_w must be positive");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "reception rate must lie in [0, 1]");
  }
}

double golden_max(const std::function<double(double)>& f, double lo, double hi) {
  double a = lo, b = hi;
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  double best = std::max(fc, fd);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * std::max(1.0, b); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
      best = std::max(best, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
      best = std::max(best, fd);
    }
  }
  return best;
}

// Observable canonical form of a strictly proper b(s)/a(s) with a monic and
// of degree n: A has the companion column on the right, C = e_n^T.
Eigen::MatrixXd observable_companion(const std::vector<double>& monic_den) {
  const int n = static_cast<int>(monic_den.size()) - 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) a(i, i - 1) = 1.0;
  // monic_den = [1, a_{n-1}, ..., a_0]; column n-1 holds -a_0 ... -a_{n-1}.
  for (int i = 0; i < n; ++i) a(i, n - 1) = -monic_den[n - i];
  return a;
}

// Ascending numerator coefficients (padded to n) of num/den after dividing by
// den's leading coefficient. num must be strictly proper w.r.t. den.
Eigen::VectorXd observable_input(const RationalTF& tf) {
  const int n = tf.order();
  const double lead = tf.den().front();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  const auto& num = tf.num();
  const int m = static_cast<int>(num.size());
  for (int k = 0; k < m; ++k) b(k) = num[m - 1 - k] / lead;
  return b;
}

std::vector<double> monic(const RationalTF& tf) {
  std::vector<double> den = tf.den();
  const double lead = den.front();
  for (double& c : den) c /= lead;
  return den;
}

double max_singular(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

double max_symmetric_eigen(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()),
                                                        Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

// L2 gain of (A, D, C) by frequency sweep.
double state_space_hinf(const Eigen::MatrixXd& a, const Eigen::MatrixXd& d,
                        const Eigen::MatrixXd& c) {
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXcd ac = a.cast<std::complex<double>>();
  const Eigen::MatrixXcd dc = d.cast<std::complex<double>>();
  const Eigen::MatrixXcd cc = c.cast<std::complex<double>>();
  auto gain = [&](double w) {
    Eigen::MatrixXcd m = std::complex<double>(0.0, w) * Eigen::MatrixXcd::Identity(n, n) - ac;
    Eigen::MatrixXcd g = cc * m.partialPivLu().solve(dc);
    if (g.rows() == 1 && g.cols() == 1) return std::abs(g(0, 0));
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
    return svd.singularValues()(0);
  };
  return frequency_sup(gain, 0.0);
}

// sup_t ||C e^{At}||_2, sampled until the slowest mode has decayed by e^-25.
double initial_condition_peak(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c) {
  const double abscissa = spectral_abscissa(a);
  const double t_end = std::max(10.0, 25.0 / -abscissa);
  const double norm_a = std::max(1.0, a.lpNorm<Eigen::Infinity>());
  const double step = std::min(0.005, 0.05 / norm_a);
  const Eigen::MatrixXd phi = (a * step).exp();
  Eigen::MatrixXd row = c;
  double peak = max_singular(row);
  for (double t = 0.0; t < t_end; t += step) {
    row = row * phi;
    peak = std::max(peak, max_singular(row));
  }
  return peak;
}

}  // namespace

RationalTF build_cacc_tf(const Gains& gains, double tau, double h_w, double gamma) {
  check_tf_inputs(gains, tau, h_w, gamma);
  return RationalTF({gamma * gains.k_a, gains.k_v, gains.k_p},
                    {tau, 1.0, gains.k_v + gains.k_p * h_w, gains.k_p});
}

std::pair<RationalTF, RationalTF> build_cacc_plus_tfs(const Gains& gains, double tau,
                                                      double h_w, double gamma) {
  return build_cacc_plus_tfs(gains, tau, h_w, gamma, gamma);
}

std::pair<RationalTF, RationalTF> build_cacc_plus_tfs(const Gains& gains, double tau,
                                                      double h_w, double gamma, double mu) {
  check_tf_inputs(gains, tau, h_w, gamma);
  check_tf_inputs(gains, tau, h_w, mu);
  const std::vector<double> den{
      tau, 1.0, (1.0 + mu) * gains.k_v + (1.0 + 2.0 * mu) * gains.k_p * h_w,
      (1.0 + mu) * gains.k_p};
  RationalTF h1({gamma * gains.k_a, gains.k_v, gains.k_p}, den);
  RationalTF h2({mu * gains.k_a, mu * gains.k_v, mu * gains.k_p}, den);
  return {std::move(h1), std::move(h2)};
}

RationalTF build_lead_error_tf(const Gains& gains, double tau, double h_w, double gamma) {
  check_tf_inputs(gains, tau, h_w, gamma);
  // E_1 = ((1 + h s) H(s) - 1) X_0 with X_0 = A_0 / s^2.
  return RationalTF({h_w * gamma * gains.k_a - tau, gamma * gains.k_a + h_w * gains.k_v - 1.0},
                    {tau, 1.0, gains.k_v + gains.k_p * h_w, gains.k_p});
}

double frequency_sup(const std::function<double(double)>& gain, double high_frequency_limit) {
  std::vector<double> w(kSweepPoints + 1);
  w[0] = 0.0;
  const double log_lo = std::log10(kSweepLow);
  const double log_step = (std::log10(kSweepHigh) - log_lo) / (kSweepPoints - 1);
  for (int i = 0; i < kSweepPoints; ++i) w[i + 1] = std::pow(10.0, log_lo + i * log_step);

  std::vector<double> g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) g[i] = gain(w[i]);

  double best = std::max(high_frequency_limit, *std::max_element(g.begin(), g.end()));
  const std::size_t last = w.size() - 1;
  for (std::size_t i = 0; i <= last; ++i) {
    const bool left_ok = i == 0 || g[i] >= g[i - 1];
    const bool right_ok = i == last || g[i] >= g[i + 1];
    if (!left_ok || !right_ok) continue;
    const double lo = w[i == 0 ? 0 : i - 1];
    const double hi = w[i == last ? last : i + 1];
    if (hi > lo) best = std::max(best, golden_max(gain, lo, hi));
  }
  return best;
}

double hinf_norm(const RationalTF& tf) {
  if (!tf.is_hurwitz()) {
    throw Error(ErrorCode::kUnstableTransferFunction,
                "hinf_norm: denominator is not Hurwitz");
  }
  auto gain = [&tf](double w) { return std::abs(tf(std::complex<double>(0.0, w))); };
  return frequency_sup(gain, tf.high_frequency_gain());
}

SumCondition string_stable_sum(const std::vector<RationalTF>& tfs) {
  SumCondition out;
  double total = 0.0;
  for (const auto& tf : tfs) {
    out.norms.push_back(hinf_norm(tf));
    total += out.norms.back();
  }
  out.margin = 1.0 - total;
  out.stable = out.margin >= -1e-9;
  return out;
}

double impulse_l1_norm(const RationalTF& tf, double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "impulse_l1_norm: need dt > 0, horizon >= 0");
  }
  if (!tf.is_hurwitz()) {
    throw Error(ErrorCode::kUnstableTransferFunction,
                "impulse_l1_norm: denominator is not Hurwitz");
  }
  const int n = tf.order();
  const double lead = tf.den().front();
  // Split off the direct feedthrough of a biproper tf.
  std::vector<double> num = tf.num();
  double feedthrough = 0.0;
  if (static_cast<int>(num.size()) == n + 1) {
    feedthrough = num.front() / lead;
    for (int k = 0; k <= n; ++k) num[k] -= feedthrough * tf.den()[k];
    num.erase(num.begin());
  }
  if (n == 0) return std::abs(feedthrough);

  const RationalTF strict(num, tf.den());
  const Eigen::MatrixXd a = observable_companion(monic(strict));
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, n);
  c(0, n - 1) = 1.0;
  const Eigen::VectorXd b = observable_input(strict);

  // Certified tail: int_t^inf |y| <= sqrt(x' Q x / (2 sigma)), Q the
  // observability Gramian of (A + sigma I, C).
  const double sigma = -0.5 * spectral_abscissa(a);
  const Eigen::MatrixXd shifted = a + sigma * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd q = solve_lyapunov(shifted.transpose(), c.transpose() * c);
  auto tail = [&](const Eigen::VectorXd& x) {
    return std::sqrt(std::max(0.0, x.dot(q * x)) / (2.0 * sigma));
  };

  const Eigen::MatrixXd phi = (a * dt).exp();
  Eigen::VectorXd x = b;
  double prev = std::abs(x(n - 1));
  double integral = 0.0;
  double t = 0.0;
  const std::size_t max_steps = 200'000'000;
  for (std::size_t k = 0; k < max_steps; ++k) {
    x = phi * x;
    t += dt;
    const double cur = std::abs(x(n - 1));
    integral += 0.5 * dt * (prev + cur);
    prev = cur;
    if (t >= horizon && tail(x) < 1e-6) break;
  }
  return std::abs(feedthrough) + integral;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "solve_lyapunov: dimension mismatch");
  }
  if (!(spectral_abscissa(a) < -1e-9)) {
    throw Error(ErrorCode::kNoSolution, "solve_lyapunov: A is not Hurwitz");
  }
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n * n, n * n);
  // vec(A X) = (I kron A) vec X, vec(X A^T) = (A kron I) vec X.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) += eye(i, j) * a;
      k.block(i * n, j * n, n, n) += a(i, j) * eye;
    }
  }
  Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q.data(), n * n);
  Eigen::VectorXd sol = k.partialPivLu().solve(rhs);
  Eigen::MatrixXd x = Eigen::Map<Eigen::MatrixXd>(sol.data(), n, n);
  return 0.5 * (x + x.transpose());
}

Eigen::MatrixXd lyapunov_gramian(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (b.rows() != a.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "lyapunov_gramian: B rows != A rows");
  }
  return solve_lyapunov(a, b * b.transpose());
}

void StateSpace::validate() const {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || c.cols() != n || d_in.rows() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "state space dimensions are inconsistent");
  }
}

StateSpace error_state_space(Scheme scheme, const Gains& gains, double tau, double h_w,
                             double gamma, double mu) {
  const double g1 = scheme == Scheme::kAcc ? 0.0 : gamma;
  const RationalTF h = build_cacc_tf(gains, tau, h_w, g1);
  const RationalTF lead = build_lead_error_tf(gains, tau, h_w, g1);
  const Eigen::MatrixXd a1 = observable_companion(monic(h));

  StateSpace ss;
  if (scheme != Scheme::kCaccPlus) {
    ss.a = a1;
    ss.b = observable_input(h);
    ss.c = Eigen::MatrixXd::Zero(1, 3);
    ss.c(0, 2) = 1.0;
    ss.d_in = observable_input(lead);
    return ss;
  }

  const auto [hp1, hp2] = build_cacc_plus_tfs(gains, tau, h_w, gamma, mu);
  const Eigen::MatrixXd a2 = observable_companion(monic(hp1));
  ss.a = Eigen::MatrixXd::Zero(6, 6);
  ss.a.topLeftCorner(3, 3) = a1;
  ss.a.bottomRightCorner(3, 3) = a2;
  ss.b = Eigen::MatrixXd::Zero(6, 2);
  ss.b.block(3, 0, 3, 1) = observable_input(hp1);
  ss.b.block(3, 1, 3, 1) = observable_input(hp2);
  ss.c = Eigen::MatrixXd::Zero(1, 6);
  ss.c(0, 2) = 1.0;
  ss.c(0, 5) = 1.0;
  ss.d_in = Eigen::MatrixXd::Zero(6, 1);
  ss.d_in.block(0, 0, 3, 1) = observable_input(lead);
  return ss;
}

PeakBound peak_output_bound(const StateSpace& ss, double alpha_star, double w0_l2) {
  ss.validate();
  if (!(alpha_star >= 0.0) || !(w0_l2 >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "peak_output_bound: alpha_star, ||w0|| must be >= 0");
  }
  if (!(spectral_abscissa(ss.a) < -1e-9)) {
    throw Error(ErrorCode::kNoSolution, "peak_output_bound: A is not Hurwitz");
  }
  PeakBound out;
  out.alpha_star = alpha_star;
  out.w0_l2 = w0_l2;

  const Eigen::MatrixXd p = lyapunov_gramian(ss.a, ss.b);
  out.j_value = std::max(0.0, max_symmetric_eigen(ss.c * p * ss.c.transpose()));
  const Eigen::MatrixXd p_lead = lyapunov_gramian(ss.a, ss.d_in);
  out.j_lead = std::max(0.0, max_symmetric_eigen(ss.c * p_lead * ss.c.transpose()));

  const Eigen::MatrixXd wo = solve_lyapunov(ss.a.transpose(), ss.c.transpose() * ss.c);
  out.beta2 = std::sqrt(std::max(0.0, max_symmetric_eigen(wo)));
  out.gamma2 = state_space_hinf(ss.a, ss.d_in, ss.c);
  out.eta = initial_condition_peak(ss.a, ss.c);

  const double root_j = std::sqrt(out.j_value);
  if (ss.b.cols() >= 2) {
    out.m1 = 2.0 * root_j * out.beta2 * alpha_star;
    out.m2 = 2.0 * root_j * out.gamma2;
  } else {
    out.m1 = (root_j * out.beta2 + out.eta) * alpha_star;
    out.m2 = root_j * out.gamma2;
  }
  out.m2 = std::max(out.m2, std::sqrt(out.j_lead));
  out.peak = out.bound(w0_l2);
  return out;
}

double safe_standstill_distance(const PeakBound& bound, double w0_l2, double margin) {
  return bound.bound(w0_l2) + margin;
}

}  // namespace platoon
