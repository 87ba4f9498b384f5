#include "nlspike/nlsops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlspike/errors.hpp"
#include "nlspike/opcount.hpp"
#include "nlspike/spikecode.hpp"

namespace nlspike {

namespace {

constexpr int kCenterFracBits = 24;

int min_scale(std::span<const QValue> v) {
  int e = v[0].scale_exp;
  for (const auto& q : v) e = std::min(e, q.scale_exp);
  return e;
}

std::vector<std::int64_t> aligned_raws(std::span<const QValue> v, int e) {
  std::vector<std::int64_t> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].scale_exp != e) ops::shift();
    r[i] = rescale(v[i], e).raw;
  }
  return r;
}

std::int64_t shift_to(std::int64_t v, int s) { return s >= 0 ? v << s : floor_shift(v, -s); }

/// Narrows a nonnegative wide product to at most 62 bits by a floor shift.
QValue narrow(int128 v, int scale_exp) {
  int drop = 0;
  while ((v >> drop) > static_cast<int128>(std::numeric_limits<std::int64_t>::max() >> 1)) ++drop;
  if (drop > 0) ops::shift();
  return {static_cast<std::int64_t>(v >> drop), scale_exp + drop};
}

QValue with_sign(QValue v, bool negative) { return negative ? QValue{-v.raw, v.scale_exp} : v; }

}  // namespace

NlsConfig NlsConfig::make(double H, int K, int T, int L, int n_cordic) {
  NlsConfig c;
  c.div = DivisionGroupConfig::make(T, L);
  c.exp_table = build_table(H, K, BelowRange::zero);
  c.cordic = CordicConfig::make(n_cordic);
  c.H = H;
  return c;
}

NlsConfig NlsConfig::defaults() { return make(5.0, 64, 16, 256, 8); }

SharedDivisor::SharedDivisor(QValue denominator, const DivisionGroupConfig& cfg) : cfg_(cfg) {
  require(denominator.raw >= 0, "divisor: denominator must be nonnegative");
  const int n = cfg.n();
  if (denominator.raw == 0) throw DenominatorUnderflow(0, std::int64_t{1} << n);
  width_ = 2 * n + 8;
  const int u = width_ - bit_length(static_cast<std::uint64_t>(denominator.raw));
  den_ = shift_to(denominator.raw, u);
  den_exp_ = denominator.scale_exp - u;
  ops::ac();
  ops::shift();
  // Denominator window: the normalized total split over T steps.
  const SpikeTrain train = encode_currents(den_, cfg.T);
  ops::shift();
  ops::ac();
  DivisionGroup g(cfg);
  theta_ = g.calibrate(train);
}

QValue SharedDivisor::divide(QValue numerator) const {
  require(numerator.raw >= 0, "divisor: numerator must be nonnegative");
  const int n = cfg_.n();
  ops::ac();
  if (numerator.raw == 0) return {0, -n};
  int s = width_ - bit_length(static_cast<std::uint64_t>(numerator.raw));
  std::int64_t a = shift_to(numerator.raw, s);
  if (a >= den_) {
    --s;
    a = shift_to(numerator.raw, s);
  }
  ops::ac();
  ops::shift();
  const SpikeTrain train = encode_currents(a, cfg_.T);
  ops::shift();
  ops::ac();
  const DivisionResult r = run(train, theta_, cfg_, Drain::until_settled);
  ops::ac();  // exponent bookkeeping
  return {r.q, -n + (numerator.scale_exp - s) - den_exp_};
}

std::vector<QValue> nls_softmax(std::span<const QValue> z, const NlsConfig& cfg) {
  require(!z.empty(), "nls_softmax: empty input");
  const std::size_t d = z.size();
  const int e = min_scale(z);
  const auto raw = aligned_raws(z, e);

  const std::int64_t mx = *std::max_element(raw.begin(), raw.end());
  ops::ac(d - 1);
  const std::int64_t offset = std::llround(std::ldexp(cfg.H, -e)) - mx;
  ops::ac();

  std::vector<QValue> ex(d);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < d; ++i) {
    ex[i] = eval(QValue{raw[i] + offset, e}, cfg.exp_table);
    total += ex[i].raw;
  }
  ops::ac(2 * d - 1);
  // The maximum maps to +H, so the total is at least e^H on a fine grid.
  require(total > 0, "nls_softmax: empty denominator");

  const SharedDivisor div(QValue{total, cfg.exp_table.output_scale_exp()}, cfg.div);
  std::vector<QValue> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = div.divide(ex[i]);
  return out;
}

QValue nls_silu(QValue x, const NlsConfig& cfg) {
  const std::int64_t h = static_cast<std::int64_t>(std::floor(std::ldexp(cfg.H, -x.scale_exp)));
  ops::ac(2);
  if (x.raw > h) return x;
  if (x.raw < -h) return {0, x.scale_exp};
  if (x.raw == 0) return x;

  const QValue ex = eval(QValue{-x.raw, x.scale_exp}, cfg.exp_table);
  const int out = ex.scale_exp;
  require(out < 0 && out > -62, "nls_silu: unsupported table output grid");
  const std::int64_t den = ex.raw + (std::int64_t{1} << -out);
  ops::ac();
  const SharedDivisor div(QValue{den, out}, cfg.div);
  const bool neg = x.raw < 0;
  return with_sign(div.divide(QValue{neg ? -x.raw : x.raw, x.scale_exp}), neg);
}

QValue sqrt_dim_constant(int d) {
  require(d >= 1, "sqrt_dim_constant: d must be >= 1");
  const long double v = std::sqrt(static_cast<long double>(d));
  int f = std::ilogb(v) - 15;
  std::int64_t r = std::llround(std::ldexp(v, -f));
  if (r == (std::int64_t{1} << 16)) {
    r >>= 1;
    ++f;
  }
  return {r, f};
}

std::vector<QValue> nls_rmsnorm(std::span<const QValue> x, double eps, const NlsConfig& cfg) {
  require(!x.empty(), "nls_rmsnorm: empty input");
  const std::size_t d = x.size();
  const QValue norm = tree_norm(x, eps, cfg.cordic);
  const SharedDivisor div(norm, cfg.div);
  const QValue c = sqrt_dim_constant(static_cast<int>(d));

  std::vector<QValue> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    const bool neg = x[i].raw < 0;
    require(x[i].raw != INT64_MIN, "nls_rmsnorm: input out of range");
    const std::int64_t mag = neg ? -x[i].raw : x[i].raw;
    const QValue num = narrow(shift_add_mul(mag, static_cast<std::uint64_t>(c.raw)), x[i].scale_exp + c.scale_exp);
    out[i] = with_sign(div.divide(num), neg);
  }
  return out;
}

std::vector<QValue> nls_layernorm(std::span<const QValue> x, double eps, const NlsConfig& cfg) {
  require(!x.empty(), "nls_layernorm: empty input");
  const std::size_t d = x.size();
  const int e = min_scale(x);
  const auto raw = aligned_raws(x, e);
  std::int64_t sum = 0;
  for (auto r : raw) sum += r;
  ops::ac(d - 1);

  std::vector<QValue> centered(d);
  if (is_pow2(static_cast<std::int64_t>(d))) {
    // x_i - sum/d exactly, on a grid log2(d) bits finer.
    const int k = log2_exact(static_cast<std::int64_t>(d));
    for (std::size_t i = 0; i < d; ++i) centered[i] = {(raw[i] << k) - sum, e - k};
    ops::shift(d);
    ops::ac(d);
  } else {
    // (d*x_i - sum) * round(2^(F+b)/d), kept F+b bits below the input grid.
    const int b = bit_length(d);
    const auto rinv = static_cast<std::uint64_t>(
        std::llround(std::ldexp(1.0L, kCenterFracBits + b) / static_cast<long double>(d)));
    for (std::size_t i = 0; i < d; ++i) {
      const auto scaled = static_cast<std::int64_t>(shift_add_mul(raw[i], d)) - sum;
      ops::ac();
      const int128 p = shift_add_mul(scaled, rinv);
      require(p >= std::numeric_limits<std::int64_t>::min() && p <= std::numeric_limits<std::int64_t>::max(),
              "nls_layernorm: centered value out of range");
      centered[i] = {static_cast<std::int64_t>(p), e - kCenterFracBits - b};
    }
  }
  return nls_rmsnorm(centered, eps, cfg);
}

double bound_softmax_raw(double eps_exp, double delta) {
  if (eps_exp >= 1.0) return std::numeric_limits<double>::infinity();
  return 2.0 / (1.0 - eps_exp) * (eps_exp + delta);
}

double bound_silu_per_abs_x(double eps_exp, double delta) {
  if (eps_exp >= 1.0) return std::numeric_limits<double>::infinity();
  return 2.0 * eps_exp / (1.0 - eps_exp) + delta;
}

double bound_rms_raw(double eps_pol, double delta, int d) {
  if (eps_pol >= 1.0) return std::numeric_limits<double>::infinity();
  return (eps_pol + delta) / (1.0 - eps_pol) + std::sqrt(static_cast<double>(d)) * delta;
}

double bound_softmax(const NlsConfig& cfg) {
  return bound_softmax_raw(bound_eps_exp(cfg.H, cfg.exp_table.K), cfg.div.delta());
}

double bound_silu(double x, const NlsConfig& cfg) {
  return std::fabs(x) * bound_silu_per_abs_x(bound_eps_exp(cfg.H, cfg.exp_table.K), cfg.div.delta());
}

double bound_rms(int d, const NlsConfig& cfg) {
  return bound_rms_raw(bound_eps_pol(d + 1, cfg.cordic.n_iters), cfg.div.delta(), d);
}

BoundReport bounds(int d, const NlsConfig& cfg) {
  BoundReport r;
  r.eps_exp = bound_eps_exp(cfg.H, cfg.exp_table.K);
  r.delta = cfg.div.delta();
  r.eps_pol = bound_eps_pol(d + 1, cfg.cordic.n_iters);
  r.softmax = bound_softmax(cfg);
  r.silu_per_abs_x = bound_silu_per_abs_x(r.eps_exp, r.delta);
  r.rms = bound_rms(d, cfg);
  return r;
}

}  // namespace nlspike
