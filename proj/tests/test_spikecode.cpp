#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <vector>

#include "nlspike/errors.hpp"
#include "nlspike/spikecode.hpp"

using namespace nlspike;

TEST_CASE("encode_rate examples") {
  const QValue th{1, 0};
  const auto z = encode_rate({0, 0}, 8, th);
  CHECK(z.train.T() == 8);
  CHECK(z.train.total() == 0);
  CHECK_FALSE(z.saturated);

  const QValue theta{3, -2};
  const auto five = encode_rate({15, -2}, 8, theta);
  CHECK(five.train.total() == 5);
  CHECK(five.train.is_binary());
  CHECK(decode_rate(five.train) == QValue{15, -2});

  const auto ten = encode_rate({30, -2}, 8, theta);
  CHECK(ten.train.total() == 8);
  CHECK(ten.saturated);
}

TEST_CASE("encode_rate preconditions") {
  CHECK_THROWS_AS(encode_rate({1, 0}, 0, {1, 0}), contract_error);
  CHECK_THROWS_AS(encode_rate({1, 0}, 4, {0, 0}), contract_error);
  CHECK_THROWS_AS(encode_rate({-1, 0}, 4, {1, 0}), contract_error);
}

TEST_CASE("encode_rate rounds to the nearest count") {
  const QValue theta{4, 0};
  CHECK(encode_rate({5, 0}, 8, theta).train.total() == 1);
  CHECK(encode_rate({6, 0}, 8, theta).train.total() == 2);
  CHECK(encode_rate({7, 0}, 8, theta).train.total() == 2);
}

TEST_CASE("decode_rate examples") {
  SpikeTrain zero{{0, 0, 0, 0}, {1, 0}};
  CHECK(decode_rate(zero).raw == 0);
  SpikeTrain tr{{1, 0, 1, 1}, {2, 0}};
  CHECK(decode_rate(tr) == QValue{6, 0});
}

TEST_CASE("decode inverts encode on the theta grid") {
  for (int T : {1, 4, 8, 16}) {
    for (std::int64_t th = 1; th <= 9; ++th) {
      for (std::int64_t k = 0; k <= T; ++k) {
        const QValue v{k * th, -3};
        const auto e = encode_rate(v, T, {th, -3});
        CHECK_FALSE(e.saturated);
        CHECK(decode_rate(e.train) == v);
      }
    }
  }
}

TEST_CASE("encode_currents splits evenly, earliest steps first") {
  const auto tr = encode_currents(10, 4);
  CHECK(tr.steps == std::vector<std::int64_t>{3, 3, 2, 2});
  CHECK(tr.total() == 10);
  CHECK(encode_currents(0, 3).total() == 0);
  CHECK_THROWS_AS(encode_currents(-1, 3), contract_error);
}

TEST_CASE("lif_step examples") {
  LifState s{{0, 0}, {1, 0}, {10, 0}};
  auto r = lif_step(s, {10, 0});
  CHECK(r.spike == 1);
  CHECK(r.state.v.raw == 0);

  std::vector<int> spikes;
  for (int i = 0; i < 3; ++i) {
    r = lif_step(s, {4, 0});
    spikes.push_back(r.spike);
    s = r.state;
  }
  CHECK(spikes == std::vector<int>{0, 0, 1});
  CHECK(s.v.raw == 2);

  const LifState leak{{8, 0}, {1, 1}, {10, 0}};
  r = lif_step(leak, {0, 0});
  CHECK(r.spike == 0);
  CHECK(r.state.v.raw == 4);
}

TEST_CASE("reset leaves the potential below threshold for bounded input") {
  for (std::int64_t th = 1; th <= 8; ++th) {
    for (std::int64_t v0 = 0; v0 < th; ++v0) {
      for (std::int64_t in = 0; in <= th; ++in) {
        const auto r = lif_step({{v0, 0}, {1, 0}, {th, 0}}, {in, 0});
        if (r.spike) CHECK(r.state.v.raw < th);
      }
    }
  }
}

// Brute force over every input sequence of length T <= 6 with currents below 2θ.
// Charge is conserved; with currents at most θ no charge is left above threshold.
TEST_CASE("spike total equals floor(sum / theta) without leak") {
  long checked = 0;
  for (std::int64_t th = 1; th <= 8; ++th) {
    const std::int64_t imax = std::min<std::int64_t>(15, 2 * th - 1);
    for (int T = 1; T <= 6; ++T) {
      // Sequences enumerated as base-(imax+1) numbers.
      std::int64_t space = 1;
      for (int t = 0; t < T; ++t) space *= imax + 1;
      for (std::int64_t code = 0; code < space; ++code) {
        LifState s{{0, 0}, {1, 0}, {th, 0}};
        std::int64_t c = code, sum = 0, total = 0, peak = 0;
        for (int t = 0; t < T; ++t) {
          const std::int64_t in = c % (imax + 1);
          c /= imax + 1;
          sum += in;
          peak = std::max(peak, in);
          const auto r = lif_step(s, {in, 0});
          total += r.spike;
          s = r.state;
        }
        if (total * th + s.v.raw != sum || s.v.raw < 0 || (peak <= th && total != sum / th)) {
          FAIL("mismatch th=" << th << " T=" << T << " code=" << code);
        }
        ++checked;
      }
    }
  }
  CHECK(checked == 30734136);
}
