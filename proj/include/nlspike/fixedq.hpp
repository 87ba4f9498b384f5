#pragma once

#include <cstdint>
#include <compare>

namespace nlspike {

__extension__ typedef __int128 int128;

/// Fixed-point scalar: value = raw * 2^scale_exp.
struct QValue {
  std::int64_t raw = 0;
  int scale_exp = 0;

  double to_double() const;
  long double to_long_double() const;
  friend bool operator==(const QValue&, const QValue&) = default;
};

/// A bounded integer grid with a binary scale.
struct QGrid {
  int bits = 8;
  int scale_exp = 0;
  bool is_signed = true;

  std::int64_t min_raw() const;
  std::int64_t max_raw() const;
  double step() const;
};

struct Quantized {
  QValue value;
  bool saturated = false;
};

struct SatSum {
  QValue value;
  bool saturated = false;
};

/// Nearest grid point, ties away from zero, clamped to the grid range.
Quantized quantize(double v, const QGrid& g);

/// Floor shift of the raw integer; the scale exponent is unchanged.
QValue shift_right(QValue q, int k);

/// Exact left shift of the raw integer.
QValue shift_left(QValue q, int k);

/// Re-express q on a finer or coarser exponent (floor when coarsening).
QValue rescale(QValue q, int scale_exp);

/// Saturating add at a signed working width of `width` bits (2..64).
SatSum sat_add(QValue a, QValue b, int width = 64);
SatSum sat_sub(QValue a, QValue b, int width = 64);

/// floor(a / 2^k) for any signed a.
constexpr std::int64_t floor_shift(std::int64_t a, int k) {
  return k >= 63 ? (a < 0 ? -1 : 0) : (a >> k);
}

/// Position of the highest set bit plus one; 0 for 0. Requires a >= 0.
int bit_length(std::uint64_t a);

/// ceil(log2(v)) for v >= 1.
int ceil_log2(std::uint64_t v);

constexpr bool is_pow2(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

/// log2 of a power of two.
int log2_exact(std::int64_t v);

/// value * c for a nonnegative constant c, formed as the sum of shifted
/// copies of value over the set bits of c. Tallied as shifts and adds.
int128 shift_add_mul(std::int64_t value, std::uint64_t c);

}  // namespace nlspike
