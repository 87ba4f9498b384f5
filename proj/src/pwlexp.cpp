#include "nlspike/pwlexp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "nlspike/errors.hpp"
#include "nlspike/opcount.hpp"

namespace nlspike {

namespace {

constexpr int kMaxExponent = (1 << PwlExpTable::kExponentBits) - 1;
constexpr std::int64_t kMaxMantissa = (1 << PwlExpTable::kMantissaBits) - 1;

void fill_derived(PwlExpTable& t) {
  t.gamma = 2.0 * t.H / t.K;
  const long double g = static_cast<long double>(t.H) * 2.0L / t.K;
  t.real_intercepts.resize(static_cast<std::size_t>(t.K) + 1);
  t.real_slopes.resize(static_cast<std::size_t>(t.K));
  for (int i = 0; i <= t.K; ++i) {
    t.real_intercepts[static_cast<std::size_t>(i)] = std::exp(-static_cast<long double>(t.H) + g * i);
  }
  for (int i = 0; i < t.K; ++i) {
    const auto k = static_cast<std::size_t>(i);
    t.real_slopes[k] = (t.real_intercepts[k + 1] - t.real_intercepts[k]) / g;
  }
  const long double unit = std::ldexp(1.0L, PwlExpTable::kFracBits);
  t.knots.resize(static_cast<std::size_t>(t.K) + 1);
  for (int i = 0; i <= t.K; ++i) {
    t.knots[static_cast<std::size_t>(i)] =
        std::llround(static_cast<long double>(i) * 2.0L * t.H * unit / t.K);
  }
  t.h_raw = std::llround(static_cast<long double>(t.H) * unit);
  t.inv_gamma_raw = static_cast<std::uint64_t>(std::llround(t.K * unit / (2.0L * t.H)));
}

std::int64_t max_knot_spacing(const PwlExpTable& t) {
  std::int64_t m = 0;
  for (int i = 0; i < t.K; ++i) {
    m = std::max(m, t.knots[static_cast<std::size_t>(i) + 1] - t.knots[static_cast<std::size_t>(i)]);
  }
  return m;
}

void validate_hk(double H, int K) {
  require(std::isfinite(H) && H > 0.0, "pwl table: H must be positive and finite");
  require(K >= 2 && is_pow2(K), "pwl table: K must be a power of two >= 2");
  require(K <= 4096, "pwl table: K too large");
}

}  // namespace

double PwlExpTable::slope_value(int i) const {
  return std::ldexp(static_cast<double>(slopes[static_cast<std::size_t>(i)]), exponent(i) + slope_scale_exp);
}

double PwlExpTable::intercept_value(int i) const {
  return std::ldexp(static_cast<double>(intercept_mantissa(i)), exponent(i) + intercept_scale_exp);
}

bool PwlExpTable::same_entries(const PwlExpTable& o) const {
  return std::bit_cast<std::uint64_t>(H) == std::bit_cast<std::uint64_t>(o.H) && K == o.K &&
         slope_scale_exp == o.slope_scale_exp && intercept_scale_exp == o.intercept_scale_exp &&
         slopes == o.slopes && intercepts == o.intercepts;
}

PwlExpTable build_table(double H, int K, BelowRange below) {
  validate_hk(H, K);
  PwlExpTable t;
  t.H = H;
  t.K = K;
  t.below_neg_H = below;
  fill_derived(t);

  const auto& b = t.real_intercepts;
  const auto& a = t.real_slopes;
  t.slope_scale_exp = std::ilogb(a[0]) - 7;
  t.intercept_scale_exp = t.slope_scale_exp - PwlExpTable::kSlopeInterceptGap;

  std::vector<int> E(static_cast<std::size_t>(K));
  std::vector<std::int64_t> mant(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i) {
    const auto k = static_cast<std::size_t>(i);
    int e = 0;
    while (std::ldexp(a[k], -(e + t.slope_scale_exp)) >= 256.0L ||
           std::llround(std::ldexp(b[k], -(e + t.intercept_scale_exp))) > kMaxMantissa) {
      ++e;
    }
    if (e > kMaxExponent) {
      throw contract_error("pwl table: H too large for the segment exponent field");
    }
    E[k] = e;
    mant[k] = std::llround(std::ldexp(b[k], -(e + t.intercept_scale_exp)));
  }

  // Slopes from the quantized knots, floored against the widest knot spacing
  // on the working grid so every segment ends at or below the next knot.
  const long double gmax = std::ldexp(static_cast<long double>(max_knot_spacing(t)), -PwlExpTable::kFracBits);
  t.slopes.resize(static_cast<std::size_t>(K));
  t.intercepts.resize(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const std::int64_t next =
        i + 1 < K ? mant[k + 1] << (E[k + 1] - E[k])
                  : std::llround(std::ldexp(b[k + 1], -(E[k] + t.intercept_scale_exp)));
    const long double rise = static_cast<long double>(next - mant[k]);
    const long double s =
        std::floor(std::ldexp(rise, t.intercept_scale_exp - t.slope_scale_exp) / gmax);
    t.slopes[k] = static_cast<std::uint8_t>(std::clamp<long double>(s, 0.0L, 255.0L));
    t.intercepts[k] = static_cast<std::uint16_t>((E[k] << PwlExpTable::kMantissaBits) | mant[k]);
  }
  return t;
}

QValue eval(QValue x, const PwlExpTable& t) {
  constexpr int F = PwlExpTable::kFracBits;
  constexpr int G = PwlExpTable::kGuardBits;
  const int out_exp = t.output_scale_exp();
  const int K = t.K;

  // Move x onto the 2^-32 working grid, deciding far out-of-range inputs early.
  const int sh = x.scale_exp + F;
  std::int64_t xw = 0;
  bool far = false;
  if (sh >= 0) {
    const std::uint64_t mag =
        x.raw < 0 ? static_cast<std::uint64_t>(-(x.raw + 1)) + 1 : static_cast<std::uint64_t>(x.raw);
    far = bit_length(mag) + sh > 60;
    if (!far) xw = x.raw * (std::int64_t{1} << sh);
  } else {
    xw = floor_shift(x.raw, -sh);
  }
  ops::shift();

  auto at = [&](int i, std::int64_t dx) {
    const int e = t.exponent(i);
    const std::int64_t base = t.intercept_mantissa(i) << (e + G);
    ops::shift();
    const int128 p = shift_add_mul(dx, t.slopes[static_cast<std::size_t>(i)]);
    const int s = e + G + PwlExpTable::kSlopeInterceptGap - F;
    const int128 term = s >= 0 ? p << s : p >> -s;
    ops::shift();
    ops::ac();
    return QValue{base + static_cast<std::int64_t>(term), out_exp};
  };
  auto below = [&]() {
    return t.below_neg_H == BelowRange::zero ? QValue{0, out_exp} : at(0, 0);
  };
  const std::int64_t top = t.knots[static_cast<std::size_t>(K)];
  auto above = [&]() { return at(K - 1, top - t.knots[static_cast<std::size_t>(K) - 1]); };

  if (far) {
    ops::ac();
    return x.raw < 0 ? below() : above();
  }
  const std::int64_t u = xw + t.h_raw;
  ops::ac(3);  // offset add, two range compares
  if (u < 0) return below();
  if (u > top) return above();

  // Reciprocal-multiply estimate of the segment, then neighbour-knot correction.
  const int128 est = shift_add_mul(u, t.inv_gamma_raw) >> (2 * F);
  int i = static_cast<int>(std::clamp<int128>(est, 0, K - 1));
  while (i + 1 < K && u >= t.knots[static_cast<std::size_t>(i) + 1]) ++i;
  while (i > 0 && u < t.knots[static_cast<std::size_t>(i)]) --i;
  ops::ac(3);  // two knot compares, dx subtract
  return at(i, u - t.knots[static_cast<std::size_t>(i)]);
}

long double eval_real(long double x, const PwlExpTable& t) {
  const long double H = t.H;
  if (x < -H) return t.below_neg_H == BelowRange::zero ? 0.0L : t.real_intercepts[0];
  if (x >= H) return t.real_intercepts[static_cast<std::size_t>(t.K)];
  const long double g = H * 2.0L / t.K;
  int i = static_cast<int>(std::floor((x + H) / g));
  i = std::clamp(i, 0, t.K - 1);
  const long double xi = -H + g * i;
  const auto k = static_cast<std::size_t>(i);
  return t.real_slopes[k] * (x - xi) + t.real_intercepts[k];
}

double bound_eps_exp(double H, int K) {
  require(H > 0.0 && K >= 1, "bound_eps_exp: invalid arguments");
  const double h = 2.0 * H / K;
  return h * h / 8.0 * std::exp(h);
}

double coefficient_slack(const PwlExpTable& t) {
  const long double gmax = std::ldexp(static_cast<long double>(max_knot_spacing(t)), -PwlExpTable::kFracBits);
  double worst = 0.0;
  for (int i = 0; i < t.K; ++i) {
    const int e = t.exponent(i);
    const int e_next = i + 1 < t.K ? t.exponent(i + 1) : e;
    const long double half_here = std::ldexp(0.5L, e + t.intercept_scale_exp);
    const long double half_next = std::ldexp(0.5L, e_next + t.intercept_scale_exp);
    const long double slope_step = std::ldexp(1.0L, e + t.slope_scale_exp);
    const long double arith =
        std::ldexp(2.0L, t.output_scale_exp()) +
        slope_step * 256.0L * std::ldexp(1.0L, -PwlExpTable::kFracBits);
    const long double dev = std::max(half_here, half_next) + slope_step * gmax + arith;
    worst = std::max(worst, static_cast<double>(dev / t.real_intercepts[static_cast<std::size_t>(i)]));
  }
  return worst;
}

namespace {

template <class U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <class U>
U get_le(std::span<const std::uint8_t> in, std::size_t off) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(in[off + i]) << (8 * i));
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize(const PwlExpTable& t) {
  std::vector<std::uint8_t> out;
  out.reserve(kLutHeaderBytes + static_cast<std::size_t>(t.K) * 3);
  put_le(out, std::bit_cast<std::uint64_t>(t.H));
  put_le(out, static_cast<std::uint32_t>(t.K));
  put_le(out, static_cast<std::uint32_t>(t.slope_scale_exp));
  put_le(out, static_cast<std::uint32_t>(t.intercept_scale_exp));
  for (auto s : t.slopes) out.push_back(s);
  for (auto w : t.intercepts) put_le(out, w);
  return out;
}

PwlExpTable deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kLutHeaderBytes) throw std::runtime_error("lut: truncated header");
  const double H = std::bit_cast<double>(get_le<std::uint64_t>(bytes, 0));
  const auto K = get_le<std::uint32_t>(bytes, 8);
  if (!(std::isfinite(H) && H > 0.0) || K < 2 || K > 4096 || !is_pow2(K)) {
    throw std::runtime_error("lut: invalid header");
  }
  if (bytes.size() != kLutHeaderBytes + std::size_t{K} * 3) throw std::runtime_error("lut: size mismatch");
  PwlExpTable t;
  t.H = H;
  t.K = static_cast<int>(K);
  t.slope_scale_exp = static_cast<std::int32_t>(get_le<std::uint32_t>(bytes, 12));
  t.intercept_scale_exp = static_cast<std::int32_t>(get_le<std::uint32_t>(bytes, 16));
  fill_derived(t);
  t.slopes.assign(bytes.begin() + kLutHeaderBytes, bytes.begin() + kLutHeaderBytes + K);
  t.intercepts.resize(K);
  for (std::size_t i = 0; i < K; ++i) {
    t.intercepts[i] = get_le<std::uint16_t>(bytes, kLutHeaderBytes + K + 2 * i);
  }
  return t;
}

void save_table(const PwlExpTable& t, const std::filesystem::path& path) {
  const auto bytes = serialize(t);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

PwlExpTable load_table(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace nlspike
