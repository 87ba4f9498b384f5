#include "nlspike/fixedq.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "nlspike/errors.hpp"
#include "nlspike/opcount.hpp"

namespace nlspike {

double QValue::to_double() const { return std::ldexp(static_cast<double>(raw), scale_exp); }

long double QValue::to_long_double() const {
  return std::ldexp(static_cast<long double>(raw), scale_exp);
}

std::int64_t QGrid::min_raw() const {
  require(bits >= 1 && bits <= 63, "grid width must be in [1, 63]");
  return is_signed ? -(std::int64_t{1} << (bits - 1)) : 0;
}

std::int64_t QGrid::max_raw() const {
  require(bits >= 1 && bits <= 63, "grid width must be in [1, 63]");
  return is_signed ? (std::int64_t{1} << (bits - 1)) - 1 : (std::int64_t{1} << bits) - 1;
}

double QGrid::step() const { return std::ldexp(1.0, scale_exp); }

Quantized quantize(double v, const QGrid& g) {
  require(std::isfinite(v), "quantize: value must be finite");
  const long double scaled = std::ldexp(static_cast<long double>(v), -g.scale_exp);
  const long double r = std::round(scaled);  // half away from zero
  const auto lo = g.min_raw();
  const auto hi = g.max_raw();
  Quantized out;
  out.value.scale_exp = g.scale_exp;
  if (r > static_cast<long double>(hi)) {
    out.value.raw = hi;
    out.saturated = true;
  } else if (r < static_cast<long double>(lo)) {
    out.value.raw = lo;
    out.saturated = true;
  } else {
    out.value.raw = static_cast<std::int64_t>(r);
  }
  return out;
}

QValue shift_right(QValue q, int k) {
  require(k >= 0, "shift_right: k must be nonnegative");
  return {floor_shift(q.raw, k), q.scale_exp};
}

QValue shift_left(QValue q, int k) {
  require(k >= 0 && k < 63, "shift_left: k out of range");
  require(q.raw == 0 || bit_length(static_cast<std::uint64_t>(q.raw < 0 ? -q.raw : q.raw)) + k < 63,
          "shift_left: overflow");
  return {q.raw * (std::int64_t{1} << k), q.scale_exp};
}

QValue rescale(QValue q, int scale_exp) {
  if (scale_exp >= q.scale_exp) {
    return {floor_shift(q.raw, scale_exp - q.scale_exp), scale_exp};
  }
  QValue s = shift_left(q, q.scale_exp - scale_exp);
  s.scale_exp = scale_exp;
  return s;
}

namespace {

SatSum saturate(int128 s, int scale_exp, int width) {
  require(width >= 2 && width <= 64, "sat_add: width must be in [2, 64]");
  const int128 hi = (static_cast<int128>(1) << (width - 1)) - 1;
  const int128 lo = -(static_cast<int128>(1) << (width - 1));
  SatSum out;
  out.value.scale_exp = scale_exp;
  if (s > hi) {
    out.value.raw = static_cast<std::int64_t>(hi);
    out.saturated = true;
  } else if (s < lo) {
    out.value.raw = static_cast<std::int64_t>(lo);
    out.saturated = true;
  } else {
    out.value.raw = static_cast<std::int64_t>(s);
  }
  return out;
}

}  // namespace

SatSum sat_add(QValue a, QValue b, int width) {
  if (a.scale_exp != b.scale_exp) throw contract_error("sat_add: scale mismatch");
  return saturate(static_cast<int128>(a.raw) + b.raw, a.scale_exp, width);
}

SatSum sat_sub(QValue a, QValue b, int width) {
  if (a.scale_exp != b.scale_exp) throw contract_error("sat_sub: scale mismatch");
  return saturate(static_cast<int128>(a.raw) - b.raw, a.scale_exp, width);
}

int bit_length(std::uint64_t a) { return static_cast<int>(std::bit_width(a)); }

int ceil_log2(std::uint64_t v) {
  require(v >= 1, "ceil_log2: argument must be positive");
  return v == 1 ? 0 : bit_length(v - 1);
}

int log2_exact(std::int64_t v) {
  require(is_pow2(v), "value must be a power of two");
  return std::countr_zero(static_cast<std::uint64_t>(v));
}

int128 shift_add_mul(std::int64_t value, std::uint64_t c) {
  int128 acc = 0;
  const int terms = std::popcount(c);
  for (std::uint64_t m = c; m != 0; m &= m - 1) {
    acc += static_cast<int128>(value) << std::countr_zero(m);
  }
  ops::shift(static_cast<std::uint64_t>(terms));
  if (terms > 1) ops::ac(static_cast<std::uint64_t>(terms - 1));
  return acc;
}

}  // namespace nlspike
