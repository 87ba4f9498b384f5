#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "nlspike/divneuron.hpp"
#include "nlspike/errors.hpp"

using namespace nlspike;

TEST_CASE("config") {
  const auto c = DivisionGroupConfig::make(4, 4);
  CHECK(c.n() == 4);
  CHECK(c.capacity() == 16);
  const auto d = DivisionGroupConfig::make(16, 256);
  CHECK(d.n() == 12);
  CHECK(d.delta() == 1.0 / 4096);
  CHECK(d.delta() == doctest::Approx(2.44e-4).epsilon(0.01));
  CHECK_THROWS_AS(DivisionGroupConfig::make(3, 4), contract_error);
  CHECK_THROWS_AS(DivisionGroupConfig::make(4, 6), contract_error);
}

TEST_CASE("calibrate examples") {
  const auto c = DivisionGroupConfig::make(4, 4);
  CHECK(calibrate(encode_currents(4096, 4), c) == 256);
  CHECK(calibrate(encode_currents(16, 4), c) == 1);
  try {
    (void)calibrate(encode_currents(15, 4), c);
    FAIL("expected underflow");
  } catch (const DenominatorUnderflow& e) {
    CHECK(e.accumulated() == 15);
    CHECK(e.minimum() == 16);
  }
  CHECK_THROWS_AS(calibrate(encode_currents(64, 8), c), contract_error);
}

TEST_CASE("thresholds are multiples of the base threshold") {
  DivisionGroup g(DivisionGroupConfig::make(4, 4));
  g.calibrate(encode_currents(160, 4));
  CHECK(g.theta() == 10);
  for (int i = 1; i <= 4; ++i) CHECK(g.threshold(i) == 10 * i);
  CHECK_THROWS_AS(g.threshold(5), contract_error);
}

TEST_CASE("run examples") {
  const auto c = DivisionGroupConfig::make(4, 4);
  const std::int64_t theta = calibrate(SpikeTrain{{40, 40, 40, 40}, {1, 0}}, c);
  CHECK(theta == 10);

  const auto r = run(SpikeTrain{{7, 9, 14, 10}, {1, 0}}, theta, c);
  CHECK(r.q == 4);
  CHECK(decode(r.q, c).to_double() == 0.25);
  CHECK_FALSE(r.clipped);

  CHECK(run(SpikeTrain{{0, 0, 0, 0}, {1, 0}}, theta, c).q == 0);

  const auto burst = run(SpikeTrain{{100, 0, 0, 0}, {1, 0}}, 10, c);
  CHECK(burst.clipped);
  CHECK(burst.q == 10);
  CHECK_FALSE(burst.saturated);

  CHECK_THROWS_AS(run(SpikeTrain{{1, 1, 1, 1}, {1, 0}}, 0, c), contract_error);
}

TEST_CASE("per-step increments follow min(L, floor(V/theta) - q)") {
  const auto c = DivisionGroupConfig::make(4, 4);
  DivisionGroup g(c);
  g.set_theta(10);
  const std::int64_t steps[] = {100, 0, 0, 0};
  const std::int64_t expect_q[] = {4, 8, 10, 10};
  std::int64_t V = 0;
  for (int t = 0; t < 4; ++t) {
    const std::int64_t before = g.q();
    V += steps[t];
    g.step(steps[t]);
    CHECK(g.q() - before == std::min<std::int64_t>(4, V / 10 - before));
    CHECK(g.q() == expect_q[t]);
  }
}

TEST_CASE("decode") {
  const auto c = DivisionGroupConfig::make(16, 256);
  CHECK(decode(0, c).to_double() == 0.0);
  CHECK(decode(4096, c).to_double() == 1.0);
  CHECK(decode(1, c).to_double() == c.delta());
}

TEST_CASE("exhaustive exactness on the (4, 4) grid") {
  const auto c = DivisionGroupConfig::make(4, 4);
  for (std::int64_t theta = 1; theta <= 64; ++theta) {
    for (std::int64_t A = 0; A <= 4095; ++A) {
      const auto tr = encode_currents(A, c.T);
      const auto settled = run(tr, theta, c, Drain::until_settled);
      REQUIRE(settled.q == A / theta);
      REQUIRE_FALSE(settled.saturated);
      REQUIRE(decode(settled.q, c) == QValue{A / theta, -4});

      const auto window = run(tr, theta, c, Drain::window);
      if (!window.clipped) REQUIRE(window.q == A / theta);
      REQUIRE(window.q <= A / theta);
    }
  }
}

TEST_CASE("q is nondecreasing in A") {
  const auto c = DivisionGroupConfig::make(16, 256);
  for (std::int64_t theta : {1, 3, 17, 255, 1024}) {
    std::int64_t prev = -1;
    for (std::int64_t A = 0; A <= 20000; A += 7) {
      const auto q = run(encode_currents(A, c.T), theta, c, Drain::until_settled).q;
      CHECK(q >= prev);
      prev = q;
    }
  }
}

TEST_CASE("calibration ignores the temporal order of the denominator") {
  const auto c = DivisionGroupConfig::make(8, 32);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::int64_t> u(0, 5000);
  for (int i = 0; i < 500; ++i) {
    SpikeTrain tr{std::vector<std::int64_t>(8), {1, 0}};
    for (auto& s : tr.steps) s = u(rng);
    if (tr.total() < 256) continue;
    const auto base = calibrate(tr, c);
    for (int p = 0; p < 5; ++p) {
      std::shuffle(tr.steps.begin(), tr.steps.end(), rng);
      CHECK(calibrate(tr, c) == base);
    }
  }
}

// Integer oracle for |q*2^-n - A/B| <= 2*Delta + A*2^n / (B*(B - 2^n)).
TEST_CASE("quotient error against the exact ratio") {
  const auto c = DivisionGroupConfig::make(16, 256);
  const int n = c.n();
  const std::int64_t P = std::int64_t{1} << n;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::int64_t> ub(2 * P, std::int64_t{1} << 24);
  for (int i = 0; i < 100000; ++i) {
    const std::int64_t B = ub(rng);
    const std::int64_t A = std::uniform_int_distribution<std::int64_t>(0, B)(rng);
    const std::int64_t theta = calibrate(encode_currents(B, c.T), c);
    const std::int64_t q = run(encode_currents(A, c.T), theta, c, Drain::until_settled).q;
    const int128 err = static_cast<int128>(q) * B - static_cast<int128>(A) * P;
    const int128 lhs = (err < 0 ? -err : err) * (B - P);
    const int128 rhs = static_cast<int128>(2) * B * (B - P) + static_cast<int128>(A) * P * P;
    REQUIRE(lhs <= rhs);
  }
}
