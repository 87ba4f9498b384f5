#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nlspike/baselines.hpp"
#include "nlspike/errors.hpp"

using namespace nlspike;

namespace {

double rel_max(const std::vector<double>& a, const std::vector<long double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, static_cast<double>(std::fabs(a[i] - b[i]) / std::fabs(b[i])));
  }
  return m;
}

}  // namespace

TEST_CASE("names round trip") {
  for (auto op : {Operator::softmax, Operator::silu, Operator::rmsnorm, Operator::layernorm}) {
    CHECK(parse_operator(to_string(op)) == op);
  }
  for (int i = 0; i < 12; ++i) {
    const auto k = static_cast<BaselineKind>(i);
    CHECK(parse_baseline(to_string(k)) == k);
  }
  CHECK_FALSE(parse_operator("gelu"));
  CHECK_FALSE(parse_baseline("bogus"));
}

TEST_CASE("oracles") {
  const std::vector<long double> eq{2, 2, 2, 2};
  for (auto v : oracle_softmax(eq)) CHECK(v == doctest::Approx(0.25));
  CHECK(oracle_silu(0.0L) == 0.0L);
  CHECK(static_cast<double>(oracle_silu(2.0L)) == doctest::Approx(2.0 / (1.0 + std::exp(-2.0))));
  const auto r = oracle_rmsnorm(std::vector<long double>{3, 4}, 0.0L);
  CHECK(static_cast<double>(r[0]) == doctest::Approx(0.84853).epsilon(1e-5));
  CHECK(static_cast<double>(r[1]) == doctest::Approx(1.13137).epsilon(1e-5));
  CHECK(static_cast<double>(r[0]) == doctest::Approx(3.0 / std::sqrt(12.5)));
  const auto big = oracle_softmax(std::vector<long double>{1000, 1000});
  CHECK(big[0] == doctest::Approx(0.5));
  const auto ln = oracle_layernorm(std::vector<long double>{1, 2, 3}, 0.0L);
  CHECK(static_cast<double>(ln[1]) == doctest::Approx(0.0));
  CHECK(static_cast<double>(ln[2]) == doctest::Approx(1.0 / std::sqrt(2.0 / 3.0)));
}

TEST_CASE("pairings") {
  CHECK(supports(BaselineKind::hardmax, Operator::softmax));
  CHECK_FALSE(supports(BaselineKind::hardmax, Operator::silu));
  CHECK(supports(BaselineKind::oracle, Operator::layernorm));
  const std::vector<double> x{1, 2};
  CHECK_THROWS_AS(baseline_eval(BaselineKind::blockwise_rms32, Operator::softmax, x), contract_error);
  CHECK_THROWS_AS(baseline_eval(BaselineKind::xnor, Operator::rmsnorm, x), contract_error);
  CHECK(baselines_for(Operator::softmax).size() == 3);
  CHECK(baselines_for(Operator::silu).size() == 6);
  CHECK(baselines_for(Operator::rmsnorm).size() == 2);
}

TEST_CASE("hardmax") {
  const auto y = baseline_eval(BaselineKind::hardmax, Operator::softmax, std::vector<double>{1, 3, 2});
  CHECK(y == std::vector<double>{0, 1, 0});
  const auto tie = baseline_eval(BaselineKind::hardmax, Operator::softmax, std::vector<double>{4, 4});
  CHECK(tie == std::vector<double>{1, 0});
}

TEST_CASE("pade and pwl exp softmax") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> z(32);
  for (auto& v : z) v = g(rng);
  const std::vector<long double> zl(z.begin(), z.end());
  const auto ref = oracle_softmax(zl);
  const auto pade = baseline_eval(BaselineKind::pade22, Operator::softmax, z);
  const auto pwl = baseline_eval(BaselineKind::pwl_exp16, Operator::softmax, z);
  double s1 = 0, s2 = 0;
  for (std::size_t i = 0; i < z.size(); ++i) s1 += pade[i], s2 += pwl[i];
  CHECK(s1 == doctest::Approx(1.0));
  CHECK(s2 == doctest::Approx(1.0));
  // Independent evaluation of the normalized diagonal rational form.
  const long double top = *std::max_element(zl.begin(), zl.end());
  std::vector<long double> pr;
  long double ps = 0;
  for (auto v : zl) {
    const long double x = v - top;
    pr.push_back((12 + 6 * x + x * x) / (12 - 6 * x + x * x));
    ps += pr.back();
  }
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(pade[i] == doctest::Approx(static_cast<double>(pr[i] / ps)).epsilon(1e-12));
  CHECK(rel_max(pwl, ref) < 0.2);
  // Padé [2/2] is exact at zero offset.
  const auto one = baseline_eval(BaselineKind::pade22, Operator::softmax, std::vector<double>{0.7});
  CHECK(one[0] == 1.0);
}

TEST_CASE("pwl_exp16 drops classes more than 2H below the maximum") {
  BaselineParams p;
  p.H = 2.0;
  const auto y = baseline_eval(BaselineKind::pwl_exp16, Operator::softmax, std::vector<double>{5, 0.5, 1.5}, p);
  CHECK(y[1] == 0.0);
  CHECK(y[2] > 0.0);
}

TEST_CASE("blockwise rms") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int d : {32, 64, 128}) {
    std::vector<double> x(static_cast<std::size_t>(d));
    for (auto& v : x) v = g(rng);
    const std::vector<long double> xl(x.begin(), x.end());
    const auto ref = oracle_rmsnorm(xl, 1e-6L);
    CHECK(rel_max(baseline_eval(BaselineKind::blockwise_rms32, Operator::rmsnorm, x), ref) < 1e-12);
    if (d % 64 == 0) CHECK(rel_max(baseline_eval(BaselineKind::blockwise_rms64, Operator::rmsnorm, x), ref) < 1e-12);
  }
  // d = 48 with 32-wide tiles: mean square over 64 slots, biased by sqrt(64/48).
  std::vector<double> x(48, 1.0);
  const auto y = baseline_eval(BaselineKind::blockwise_rms32, Operator::rmsnorm, x, {5.0, 0.0});
  CHECK(y[0] == doctest::Approx(std::sqrt(64.0 / 48.0)));
}

TEST_CASE("silu baselines") {
  const std::vector<double> x{-4, -1, 0, 0.5, 3};
  CHECK(baseline_eval(BaselineKind::relu, Operator::silu, x) == std::vector<double>{0, 0, 0, 0.5, 3});
  const auto hs = baseline_eval(BaselineKind::hardswish, Operator::silu, x);
  CHECK(hs[0] == 0.0);
  CHECK(hs[1] == doctest::Approx(-1.0 / 3.0));
  CHECK(hs[4] == 3.0);
  const auto dq = baseline_eval(BaselineKind::dorefa4b, Operator::silu, x);
  CHECK(dq[2] == 0.0);
  for (double v : dq) {
    const double k = v / (5.0 / 7.0);
    CHECK(std::fabs(k - std::round(k)) < 1e-12);
    CHECK(std::fabs(k) <= 7.0 + 1e-12);
  }
  const auto xn = baseline_eval(BaselineKind::xnor, Operator::silu, x);
  const double m = (4 + 1 + 0 + 0.5 + 3) / 5.0;
  CHECK(xn == std::vector<double>{-m, -m, 0.0, m, m});
  for (auto k : {BaselineKind::pwl_sigmoid16, BaselineKind::pwl_sigmoid64}) {
    const auto y = baseline_eval(k, Operator::silu, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double ref = static_cast<double>(oracle_silu(x[i]));
      CHECK(std::fabs(y[i] - ref) < (k == BaselineKind::pwl_sigmoid16 ? 0.05 : 0.005));
    }
    CHECK(y[2] == 0.0);
  }
}

TEST_CASE("baselines are deterministic") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  std::vector<double> x(40);
  for (auto& v : x) v = g(rng);
  for (auto op : {Operator::softmax, Operator::silu, Operator::rmsnorm}) {
    for (auto k : baselines_for(op)) CHECK(baseline_eval(k, op, x) == baseline_eval(k, op, x));
  }
}
