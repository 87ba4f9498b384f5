#include "nlspike/polarnorm.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nlspike/errors.hpp"
#include "nlspike/opcount.hpp"

namespace nlspike {

namespace {

/// Vectoring iterations on a shared integer grid; inputs nonnegative.
std::int64_t cordic_magnitude(std::int64_t x, std::int64_t y, const CordicConfig& cfg) {
  for (int i = 0; i < cfg.n_iters; ++i) {
    const std::int64_t xs = floor_shift(x, i);
    const std::int64_t ys = floor_shift(y, i);
    if (y >= 0) {
      x += ys;
      y -= xs;
    } else {
      x -= ys;
      y += xs;
    }
  }
  ops::ac(3 * static_cast<std::uint64_t>(cfg.n_iters));
  ops::shift(2 * static_cast<std::uint64_t>(cfg.n_iters));
  const int128 scaled = shift_add_mul(x, cfg.gain_inv_raw) >> CordicConfig::kGainFrac;
  ops::shift();
  return static_cast<std::int64_t>(scaled);
}

std::int64_t to_exp(std::int64_t raw, int from, int to) {
  return to <= from ? rescale(QValue{raw, from}, to).raw : floor_shift(raw, to - from);
}

std::int64_t abs64(std::int64_t v) {
  require(v != INT64_MIN, "polarnorm: magnitude out of range");
  return v < 0 ? -v : v;
}

}  // namespace

long double cordic_gain_inv(int n_iters) {
  long double p = 1.0L;
  for (int i = 0; i < n_iters; ++i) p /= std::sqrt(1.0L + std::ldexp(1.0L, -2 * i));
  return p;
}

CordicConfig CordicConfig::make(int n_iters) {
  require(n_iters >= 1 && n_iters <= 30, "cordic: n_iters must be in [1, 30]");
  CordicConfig c;
  c.n_iters = n_iters;
  c.gain_inv_raw = static_cast<std::uint64_t>(std::llround(std::ldexp(cordic_gain_inv(n_iters), kGainFrac)));
  return c;
}

double CordicConfig::gain_inv() const { return std::ldexp(static_cast<double>(gain_inv_raw), -kGainFrac); }

QValue hypot(QValue a, QValue b, const CordicConfig& cfg) {
  const int e = std::min(a.scale_exp, b.scale_exp);
  const std::int64_t A = abs64(rescale(a, e).raw);
  const std::int64_t B = abs64(rescale(b, e).raw);
  const std::int64_t m = std::max(A, B);
  if (m == 0) return {0, e};
  const int s = e + bit_length(static_cast<std::uint64_t>(m)) - CordicConfig::kWorkingBits;
  ops::shift(2);
  return {cordic_magnitude(to_exp(A, e, s), to_exp(B, e, s), cfg), s};
}

QValue tree_norm(std::span<const QValue> x, double eps, const CordicConfig& cfg) {
  require(!x.empty(), "tree_norm: empty input");
  require(eps >= 0.0 && std::isfinite(eps), "tree_norm: eps must be nonnegative");
  int e = x[0].scale_exp;
  for (const auto& v : x) e = std::min(e, v.scale_exp);

  std::vector<std::int64_t> mags(x.size());
  std::int64_t m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mags[i] = abs64(rescale(x[i], e).raw);
    m = std::max(m, mags[i]);
  }
  const long double aug = std::sqrt(static_cast<long double>(eps) * static_cast<long double>(x.size()));
  if (m == 0 && aug == 0.0L) return {0, e};

  // Coarsest exponent at which the largest leaf still has kWorkingBits bits.
  int s = INT32_MIN;
  if (m > 0) s = e + bit_length(static_cast<std::uint64_t>(m)) - CordicConfig::kWorkingBits;
  if (aug > 0.0L) s = std::max(s, std::ilogb(aug) + 1 - CordicConfig::kWorkingBits);

  const std::size_t leaves = x.size() + 1;
  std::size_t width = 1;
  while (width < leaves) width <<= 1;
  std::vector<std::int64_t> level(width, 0);
  for (std::size_t i = 0; i < x.size(); ++i) level[i] = to_exp(mags[i], e, s);
  level[x.size()] = std::llround(std::ldexp(aug, -s));
  ops::shift(x.size());

  while (width > 1) {
    width >>= 1;
    for (std::size_t j = 0; j < width; ++j) level[j] = cordic_magnitude(level[2 * j], level[2 * j + 1], cfg);
  }
  return {level[0], s};
}

long double hypot_real(long double a, long double b, int n_iters) {
  long double x = std::fabs(a);
  long double y = std::fabs(b);
  for (int i = 0; i < n_iters; ++i) {
    const long double xs = std::ldexp(x, -i);
    const long double ys = std::ldexp(y, -i);
    if (y >= 0) {
      x += ys;
      y -= xs;
    } else {
      x -= ys;
      y += xs;
    }
  }
  return x * cordic_gain_inv(n_iters);
}

long double tree_norm_real(std::span<const long double> x, long double eps, int n_iters) {
  require(!x.empty(), "tree_norm_real: empty input");
  std::size_t width = 1;
  while (width < x.size() + 1) width <<= 1;
  std::vector<long double> level(width, 0.0L);
  for (std::size_t i = 0; i < x.size(); ++i) level[i] = std::fabs(x[i]);
  level[x.size()] = std::sqrt(eps * static_cast<long double>(x.size()));
  while (width > 1) {
    width >>= 1;
    for (std::size_t j = 0; j < width; ++j) level[j] = hypot_real(level[2 * j], level[2 * j + 1], n_iters);
  }
  return level[0];
}

int tree_height(int leaves) {
  require(leaves >= 1, "tree_height: leaves must be >= 1");
  return ceil_log2(static_cast<std::uint64_t>(leaves));
}

double bound_eps_pair(int n) { return std::ldexp(1.0, -2 * n - 1); }

double bound_eps_pol(int d, int n) {
  require(d >= 1 && n >= 1, "bound_eps_pol: invalid arguments");
  return tree_height(d) * bound_eps_pair(n);
}

double residual_angle_bound(int n) {
  const long double t = std::ldexp(1.0L, -(n - 1));
  return static_cast<double>(1.0L - 1.0L / std::sqrt(1.0L + t * t));
}

}  // namespace nlspike
