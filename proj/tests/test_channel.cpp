#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "platoon/channel.hpp"
#include "platoon/error.hpp"

using namespace platoon;

TEST_SUITE("channel") {

TEST_CASE("gamma formula") {
  CHECK(gamma_of({0.2, 0.1, 0.2}) == doctest::Approx(0.4667).epsilon(1e-4 / 0.4667));
  CHECK(gamma_of({0.2, 0.1, 1.0}) == 1.0);
  CHECK(gamma_of({1.0, 0.0, 0.3}) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK_THROWS_AS(gamma_of({0.0, 0.0, 0.5}), Error);
  try {
    gamma_of({0.0, 0.0, 0.5});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUndefinedRate);
  }
  CHECK_THROWS_AS(gamma_of({1.2, 0.1, 0.5}), Error);
}

TEST_CASE("absorbing good channel always delivers") {
  ChannelState s(ChannelMode::kGood, 7);
  for (int k = 0; k < 10000; ++k) CHECK(channel_step(s, {0.0, 0.5, 0.0}).received);
}

TEST_CASE("absorbing bad channel with R = 0 never delivers") {
  for (auto mode : {ChannelMode::kGood, ChannelMode::kBad}) {
    ChannelState s(mode, 11);
    for (int k = 0; k < 1000; ++k) {
      CHECK_FALSE(channel_step(s, {1.0, 0.0, 0.0}).received);
      CHECK(s.mode() == ChannelMode::kBad);
    }
  }
}

TEST_CASE("long-run reception fraction and bad-state occupancy") {
  const GilbertParams p{0.2, 0.1, 0.2};
  auto s = ChannelState::make(p, 2024, 0);
  long received = 0, bad = 0;
  const long n = 1000000;
  for (long k = 0; k < n; ++k) {
    received += channel_step(s, p).received;
    bad += s.mode() == ChannelMode::kBad;
  }
  CHECK(std::abs(double(received) / n - gamma_of(p)) < 0.003);
  CHECK(std::abs(double(bad) / n - p.stationary_bad()) < 0.005);
}

TEST_CASE("empirical rate matches gamma over random parameters") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int trial = 0; trial < 40; ++trial) {
    const GilbertParams p{u(rng), u(rng), u(rng)};
    auto s = ChannelState::make(p, 1000 + trial, 0);
    const long n = 100000;
    long received = 0;
    for (long k = 0; k < n; ++k) received += channel_step(s, p).received;
    // Bursts correlate successive samples; inflate the binomial sigma by the
    // mixing factor (1 + lambda) / (1 - lambda), lambda = 1 - p - q.
    const double g = gamma_of(p);
    const double lambda = 1.0 - p.p_gb - p.q_bg;
    const double inflate = std::sqrt(std::max(1.0, (1.0 + std::abs(lambda)) / (1.0 - std::abs(lambda))));
    const double sigma = std::sqrt(g * (1.0 - g) / n) * inflate * 2.0;
    CHECK(std::abs(double(received) / n - g) < std::max(3.0 * sigma, 1e-3));
  }
}

TEST_CASE("estimate over a trailing window") {
  std::vector<LinkSample> all(100, LinkSample{true});
  CHECK(estimate_gamma(all, 100) == 1.0);
  std::vector<LinkSample> alt;
  for (int k = 0; k < 10; ++k) alt.push_back({k % 2 == 0});
  CHECK(estimate_gamma(alt, 2) == 0.5);
  CHECK_THROWS_AS(estimate_gamma(alt, 11), Error);
  CHECK_THROWS_AS(estimate_gamma(alt, 0), Error);

  const GilbertParams p{0.2, 0.1, 0.2};
  auto s = ChannelState::make(p, 5, 3);
  std::vector<LinkSample> stream;
  for (int k = 0; k < 200000; ++k) stream.push_back(channel_step(s, p));
  CHECK(std::abs(estimate_gamma(stream, 100000) - 0.4667) < 0.01);
}

TEST_CASE("platoon gamma is the smallest link estimate") {
  const std::vector<double> a{0.9, 0.5, 0.7}, b{0.42}, c{1, 1, 1};
  CHECK(platoon_gamma(a) == 0.5);
  CHECK(platoon_gamma(b) == 0.42);
  CHECK(platoon_gamma(c) == 1.0);
  CHECK_THROWS_AS(platoon_gamma(std::vector<double>{}), Error);
}

TEST_CASE("identical seeds give identical streams; links differ") {
  const GilbertParams p{0.2, 0.1, 0.2};
  auto a = ChannelState::make(p, 42, 0), b = ChannelState::make(p, 42, 0);
  auto c = ChannelState::make(p, 42, 1);
  int same = 0;
  for (int k = 0; k < 5000; ++k) {
    const bool ra = channel_step(a, p).received;
    CHECK(ra == channel_step(b, p).received);
    same += ra == channel_step(c, p).received;
  }
  CHECK(same < 5000);
  CHECK(link_seed(42, 0) != link_seed(42, 1));
  CHECK(link_seed(42, 0) != link_seed(43, 0));
}

TEST_CASE("distinct links are uncorrelated") {
  const GilbertParams p{0.2, 0.1, 0.2};
  auto a = ChannelState::make(p, 8, 0), b = ChannelState::make(p, 8, 1);
  const int n = 200000;
  double sa = 0, sb = 0, sab = 0;
  for (int k = 0; k < n; ++k) {
    const double x = channel_step(a, p).received, y = channel_step(b, p).received;
    sa += x;
    sb += y;
    sab += x * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  CHECK(std::abs(cov) < 0.01);
}

TEST_CASE("initial mode follows the stationary distribution") {
  const GilbertParams p{0.2, 0.1, 0.2};
  int bad = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    bad += ChannelState::make(p, 77, static_cast<std::uint64_t>(i)).mode() == ChannelMode::kBad;
  }
  CHECK(std::abs(double(bad) / n - 2.0 / 3.0) < 0.02);
  for (int i = 0; i < 100; ++i) {
    CHECK(ChannelState::make(p, 77, static_cast<std::uint64_t>(i), InitialMode::kGood).mode() ==
          ChannelMode::kGood);
  }
}

}  // TEST_SUITE
