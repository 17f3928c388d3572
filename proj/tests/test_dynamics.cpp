#include <cmath>

#include <doctest.h>

#include "platoon/dynamics.hpp"
#include "platoon/error.hpp"

using namespace platoon;

namespace {

// Forward Euler on x' = v, v' = a, a' = (u - a) / tau.
VehicleState euler(VehicleState s, double u, double tau, double t, double h) {
  const auto n = static_cast<long>(std::llround(t / h));
  for (long k = 0; k < n; ++k) {
    const VehicleState d{s.v, s.a, (u - s.a) / tau};
    s.x += h * d.x;
    s.v += h * d.v;
    s.a += h * d.a;
  }
  return s;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("step response of the lag") {
  const VehicleState s = step_lag({0, 0, 0}, 1.0, 0.4, 0.4);
  CHECK(s.a == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(s.a == doctest::Approx(0.6321).epsilon(1e-4));
  const VehicleState far = step_lag({0, 0, 0}, 1.0, 0.4, 40.0);
  CHECK(far.a == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("step response against a fine forward-Euler oracle") {
  const VehicleState exact = step_lag({0, 0, 0}, 1.0, 0.4, 0.4);
  const VehicleState ref = euler({0, 0, 0}, 1.0, 0.4, 0.4, 1e-6);
  CHECK(std::abs(exact.a - ref.a) < 1e-6);
  CHECK(std::abs(exact.v - ref.v) < 1e-6);
  CHECK(std::abs(exact.x - ref.x) < 1e-6);
}

TEST_CASE("zero input from zero state stays zero exactly") {
  VehicleState s{};
  for (int k = 0; k < 1000; ++k) s = step_lag(s, 0.0, 0.37, 0.01);
  CHECK(s == VehicleState{});
}

TEST_CASE("two half steps equal one full step") {
  const double taus[] = {0.05, 0.37, 0.4, 3.0};
  const double dts[] = {1e-4, 0.01, 0.3, 2.0};
  for (double tau : taus) {
    for (double dt : dts) {
      const VehicleState s0{12.5, 21.0, -3.0};
      const VehicleState one = step_lag(s0, -9.0, tau, dt);
      const VehicleState two = step_lag(step_lag(s0, -9.0, tau, dt / 2), -9.0, tau, dt / 2);
      CHECK(std::abs(one.x - two.x) < 1e-12 * std::max(1.0, std::abs(one.x)));
      CHECK(std::abs(one.v - two.v) < 1e-12 * std::max(1.0, std::abs(one.v)));
      CHECK(std::abs(one.a - two.a) < 1e-12);
    }
  }
}

TEST_CASE("30 s of braking stays within 1e-3 of a 100x finer Euler run") {
  const Maneuver m{{{0.0, 0.0}, {10.0, -9.0}, {11.0, 0.0}}, 25.0};
  const double tau = 0.4, dt = 0.01;
  VehicleState exact{0.0, 25.0, 0.0}, ref = exact;
  double worst = 0.0;
  for (int k = 0; k < 3000; ++k) {
    const double u = m.command_at(k * dt);
    exact = step_lag(exact, u, tau, dt);
    ref = euler(ref, u, tau, dt, dt / 100);
    worst = std::max({worst, std::abs(exact.x - ref.x), std::abs(exact.v - ref.v),
                      std::abs(exact.a - ref.a)});
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("non-finite inputs are rejected") {
  CHECK_THROWS_AS(step_lag({NAN, 0, 0}, 0, 0.4, 0.01), Error);
  CHECK_THROWS_AS(step_lag({0, 0, 0}, INFINITY, 0.4, 0.01), Error);
  CHECK_THROWS_AS(step_lag({0, 0, 0}, 0, 0.0, 0.01), Error);
  CHECK_THROWS_AS(step_lag({0, 0, 0}, 0, 0.4, -0.01), Error);
}

TEST_CASE("time grid") {
  CHECK(TimeGrid{0.01, 30.0}.steps() == 3000);
  CHECK(TimeGrid{0.01, 30.0}.time(3000) == doctest::Approx(30.0));
  CHECK_THROWS_AS((TimeGrid{0.01, 30.005}.steps()), Error);
  CHECK_THROWS_AS((TimeGrid{0.0, 30.0}.steps()), Error);
}

TEST_CASE("maneuver validation") {
  CHECK_THROWS_AS((Maneuver{{}, 25.0}.validate()), Error);
  CHECK_THROWS_AS((Maneuver{{{1.0, 0.0}}, 25.0}.validate()), Error);
  CHECK_THROWS_AS((Maneuver{{{0.0, 0.0}, {0.0, 1.0}}, 25.0}.validate()), Error);
  CHECK_THROWS_AS((Maneuver{{{0.0, 11.0}}, 25.0}.validate()), Error);
  CHECK_NOTHROW((Maneuver{{{0.0, 11.0}}, 25.0}.validate(12.0)));
}

TEST_CASE("braking maneuver L2 norm and commands") {
  const Maneuver m{{{0.0, 0.0}, {10.0, -9.0}, {11.0, 0.0}}, 25.0};
  CHECK(m.l2_norm(30.0) == doctest::Approx(9.0));
  CHECK(m.command_at(9.99) == 0.0);
  CHECK(m.command_at(10.0) == -9.0);
  CHECK(m.command_at(10.5) == -9.0);
  CHECK(m.command_at(11.0) == 0.0);
}

TEST_CASE("lead at constant speed") {
  const auto traj = lead_trajectory({{{0.0, 0.0}}, 25.0}, 0.4, {0.01, 5.0});
  REQUIRE(traj.size() == 501);
  for (const auto& s : traj) CHECK(s.v == 25.0);
  CHECK(traj.back().x == doctest::Approx(125.0));
}

TEST_CASE("lead braking reaches 16 m/s") {
  const double tau = 0.4;
  const auto traj = lead_trajectory({{{0.0, 0.0}, {10.0, -9.0}, {11.0, 0.0}}, 25.0}, tau,
                                    {0.01, 30.0});
  const auto k = static_cast<std::size_t>(std::lround((11.0 + 5 * tau) / 0.01));
  CHECK(std::abs(traj[k].v - 16.0) < 0.1);
  CHECK(traj.back().v == doctest::Approx(16.0).epsilon(1e-9));
}

TEST_CASE("lead velocity matches the analytic lag integral") {
  const double tau = 0.4;
  const auto traj = lead_trajectory({{{0.0, 2.0}}, 0.0}, tau, {0.01, 10.0});
  for (std::size_t k = 0; k < traj.size(); k += 37) {
    const double t = 0.01 * static_cast<double>(k);
    const double v = 2.0 * (t - tau * (1.0 - std::exp(-t / tau)));
    CHECK(traj[k].v == doctest::Approx(v).epsilon(1e-12).scale(1.0));
  }
}

}  // TEST_SUITE
