#include <cmath>
#include <random>

#include <doctest.h>

#include "platoon/error.hpp"
#include "platoon/stability.hpp"

using namespace platoon;

namespace {

constexpr double kGamma = 0.46666666666666656;

double cacc_norm(const Gains& g, double tau, double h, double gamma) {
  return hinf_norm(build_cacc_tf(g, tau, h, gamma));
}

double plus_sum(const Gains& g, double tau, double h, double gamma) {
  const auto [p1, p2] = build_cacc_plus_tfs(g, tau, h, gamma);
  return hinf_norm(p1) + hinf_norm(p2);
}

}  // namespace

TEST_SUITE("stability") {

TEST_CASE("DC gain is one") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 3.0), r(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Gains g{u(rng), u(rng), u(rng)};
    const double tau = u(rng), h = u(rng), gamma = r(rng);
    CHECK(build_cacc_tf(g, tau, h, gamma).dc_gain() == doctest::Approx(1.0).epsilon(1e-14));
    const auto [p1, p2] = build_cacc_plus_tfs(g, tau, h, gamma);
    CHECK(p1.dc_gain() + p2.dc_gain() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("no communication lowers the numerator degree") {
  const Gains g{0.2, 2.5, 1.0};
  CHECK(build_cacc_tf(g, 0.4, 0.8, 0.0).num().size() == 2);
  CHECK(build_cacc_tf(g, 0.4, 0.8, 0.5).num().size() == 3);
  const auto [p1, p2] = build_cacc_plus_tfs(g, 0.4, 0.8, 0.0);
  CHECK(p2(std::complex<double>(0.0, 1.3)) == std::complex<double>(0.0, 0.0));
  CHECK(p2.dc_gain() == 0.0);
}

TEST_CASE("first-order norms") {
  CHECK(hinf_norm(RationalTF({1.0}, {1.0, 1.0})) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(hinf_norm(RationalTF({1.0, 0.0}, {1.0, 1.0})) >= 1.0 - 1e-6);
  CHECK(hinf_norm(RationalTF({2.0}, {1.0, 0.1, 1.0})) ==
        doctest::Approx(2.0 / (0.1 * std::sqrt(1.0 - 0.0025))).epsilon(1e-6));
  CHECK_THROWS_AS(hinf_norm(RationalTF({1.0}, {1.0, -1.0})), Error);
}

TEST_CASE("norms against an independent dense-grid oracle") {
  const Gains a{0.2, 2.5, 1.0};
  CHECK(cacc_norm(a, 0.4, 0.45, 1.0) == doctest::Approx(1.2436066302226763).epsilon(1e-6));
  CHECK(cacc_norm(a, 0.4, 0.7, 1.0) == doctest::Approx(1.1605958633376998).epsilon(1e-6));
  CHECK(cacc_norm(a, 0.4, 2 * 0.4 / 1.2, 1.0) ==
        doctest::Approx(1.170730330106537).epsilon(1e-6));
  CHECK(cacc_norm(a, 0.4, 0.8, 0.0) == doctest::Approx(1.1489334543478222).epsilon(1e-6));

  const Gains b{0.8, 1.5, 2.0};
  CHECK(cacc_norm(b, 0.37, 0.5388349514563107, kGamma) ==
        doctest::Approx(1.0252521595434467).epsilon(1e-6));
  CHECK(cacc_norm(b, 0.37, 0.6, kGamma) == doctest::Approx(1.0).epsilon(1e-9));

  CHECK(plus_sum({0.75, 2.5, 1.5}, 0.37, 0.4, kGamma) ==
        doctest::Approx(1.4962234460328798).epsilon(1e-6));
  CHECK(plus_sum(a, 0.4, 0.6, kGamma) == doctest::Approx(1.3146500911762469).epsilon(1e-6));
  CHECK(plus_sum(a, 0.4, 0.5338222210239681, kGamma) ==
        doctest::Approx(1.3414399013826388).epsilon(1e-6));
}

TEST_CASE("sum condition") {
  const RationalTF low({0.8}, {1.0, 1.0});
  const auto one = string_stable_sum({low});
  CHECK(one.stable);
  CHECK(one.margin == doctest::Approx(0.2).epsilon(1e-6));
  const RationalTF mid({0.6}, {1.0, 1.0});
  const auto two = string_stable_sum({mid, mid});
  CHECK_FALSE(two.stable);
  CHECK(two.margin == doctest::Approx(-0.2).epsilon(1e-6));
  CHECK(string_stable_sum({build_cacc_tf({0.8, 1.5, 2.0}, 0.37, 0.6, kGamma)}).stable);
}

TEST_CASE("impulse L1 norm") {
  CHECK(impulse_l1_norm(RationalTF({1.0}, {1.0, 1.0}), 30.0, 1e-3) ==
        doctest::Approx(1.0).epsilon(1e-5));
  const RationalTF tf({1.0, 2.0}, {1.0, 2.0, 2.0});
  const double coarse = impulse_l1_norm(tf, 30.0, 1e-3);
  const double fine = impulse_l1_norm(tf, 30.0, 1e-4);
  CHECK(coarse == doctest::Approx(1.1400934670509761).epsilon(1e-5));
  CHECK(std::abs(coarse - fine) < 1e-5);
}

TEST_CASE("inequality chain on constructed transfer functions") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 2.5), r(0.0, 1.0);
  int checked = 0;
  while (checked < 40) {
    const Gains g{u(rng), u(rng), u(rng)};
    const RationalTF tf = build_cacc_tf(g, u(rng) * 0.5, u(rng), r(rng));
    if (!tf.is_hurwitz()) continue;
    const double hinf = hinf_norm(tf);
    const double l1 = impulse_l1_norm(tf, 60.0, 1e-3);
    CHECK(std::abs(tf.dc_gain()) <= hinf + 1e-3);
    CHECK(hinf <= l1 + 1e-3);
    ++checked;
  }
}

TEST_CASE("Lyapunov solutions") {
  const Eigen::MatrixXd p1 = lyapunov_gramian(Eigen::MatrixXd::Constant(1, 1, -1.0),
                                              Eigen::MatrixXd::Constant(1, 1, 1.0));
  CHECK(p1(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  const Eigen::MatrixXd p2 =
      lyapunov_gramian(-Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2));
  CHECK((p2 - 0.5 * Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-14);
  Eigen::MatrixXd unstable(1, 1);
  unstable << 0.5;
  CHECK_THROWS_AS(lyapunov_gramian(unstable, Eigen::MatrixXd::Constant(1, 1, 1.0)), Error);
}

TEST_CASE("Gramian of the error dynamics is symmetric PSD with small residual") {
  for (Scheme s : {Scheme::kAcc, Scheme::kCacc, Scheme::kCaccPlus}) {
    const StateSpace ss = error_state_space(s, {0.8, 1.5, 2.0}, 0.37, 0.6, kGamma, kGamma);
    const Eigen::MatrixXd p = lyapunov_gramian(ss.a, ss.b);
    const Eigen::MatrixXd bb = ss.b * ss.b.transpose();
    const Eigen::MatrixXd residual = ss.a * p + p * ss.a.transpose() + bb;
    CHECK(residual.norm() < 1e-8 * bb.norm());
    CHECK((p - p.transpose()).norm() < 1e-12 * p.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (p + p.transpose()));
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("scalar peak bound equals the worst-case L2 to Linf gain") {
  StateSpace ss;
  ss.a = Eigen::MatrixXd::Constant(1, 1, -1.0);
  ss.b = Eigen::MatrixXd::Constant(1, 1, 1.0);
  ss.c = Eigen::MatrixXd::Constant(1, 1, 1.0);
  ss.d_in = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const PeakBound pb = peak_output_bound(ss, 0.0, 1.0);
  CHECK(pb.j_value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pb.m2 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));

  // The time-reversed impulse response u(t) = e^{-(T - t)} achieves the gain.
  const double horizon = 20.0, dt = 1e-4;
  double y = 0.0, energy = 0.0;
  const auto n = static_cast<long>(horizon / dt);
  for (long k = 0; k < n; ++k) {
    const double t = (k + 0.5) * dt;
    const double u = std::exp(-(horizon - t));
    y = y * std::exp(-dt) - std::expm1(-dt) * u;
    energy += u * u * dt;
  }
  CHECK(y / std::sqrt(energy) == doctest::Approx(std::sqrt(pb.j_value)).epsilon(1e-4));
}

TEST_CASE("zero output matrix collapses the bound") {
  StateSpace ss;
  ss.a = -Eigen::MatrixXd::Identity(2, 2);
  ss.b = Eigen::MatrixXd::Ones(2, 1);
  ss.c = Eigen::MatrixXd::Zero(1, 2);
  ss.d_in = Eigen::MatrixXd::Ones(2, 1);
  const PeakBound pb = peak_output_bound(ss, 2.0, 5.0);
  CHECK(pb.j_value == 0.0);
  CHECK(pb.m2 == 0.0);
  CHECK(pb.m1 == doctest::Approx(pb.eta * 2.0));
}

TEST_CASE("standstill distance is affine in the disturbance energy") {
  const StateSpace ss = error_state_space(Scheme::kCacc, {0.8, 1.5, 2.0}, 0.37, 0.6, kGamma,
                                          kGamma);
  const PeakBound zero = peak_output_bound(ss, 0.0, 0.0);
  CHECK(safe_standstill_distance(zero, 0.0) == 0.0);
  const PeakBound pb = peak_output_bound(ss, 0.3, 9.0);
  const double d1 = safe_standstill_distance(pb, 9.0);
  const double d2 = safe_standstill_distance(pb, 18.0);
  CHECK(d2 - d1 == doctest::Approx(pb.m2 * 9.0).epsilon(1e-12));
  CHECK(safe_standstill_distance(pb, 9.0, 1.5) == doctest::Approx(d1 + 1.5));
  CHECK(pb.j_value >= 0.0);
  CHECK(pb.m1 >= 0.0);
  CHECK(pb.m2 >= 0.0);
}

TEST_CASE("dimension and stability checks") {
  StateSpace ss;
  ss.a = -Eigen::MatrixXd::Identity(2, 2);
  ss.b = Eigen::MatrixXd::Ones(3, 1);
  ss.c = Eigen::MatrixXd::Ones(1, 2);
  ss.d_in = Eigen::MatrixXd::Ones(2, 1);
  CHECK_THROWS_AS(peak_output_bound(ss, 0.0, 1.0), Error);
  ss.b = Eigen::MatrixXd::Ones(2, 1);
  ss.a = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(peak_output_bound(ss, 0.0, 1.0), Error);
}

}  // TEST_SUITE
