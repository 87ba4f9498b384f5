#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nlspike/fixedq.hpp"

namespace nlspike {

enum class BelowRange { zero, clamp };

/// K-segment piecewise-linear e^x on [-H, H].
///
/// Coefficients are block-floating per segment: a 5-bit exponent E_i sits in
/// the top bits of the 16-bit intercept word above an 11-bit mantissa, and the
/// 8-bit slope mantissa shares that exponent:
///   b_i = mant(intercept_i) * 2^(E_i + intercept_scale_exp)
///   a_i = slope_i           * 2^(E_i + slope_scale_exp)
struct PwlExpTable {
  static constexpr int kExponentBits = 5;
  static constexpr int kMantissaBits = 11;
  static constexpr int kFracBits = 32;   ///< working grid for x
  static constexpr int kGuardBits = 8;   ///< extra output bits below the intercept grid
  static constexpr int kSlopeInterceptGap = 3;

  double H = 5.0;
  int K = 64;
  double gamma = 0.15625;
  int slope_scale_exp = 0;
  int intercept_scale_exp = 0;
  std::vector<std::uint8_t> slopes;
  std::vector<std::uint16_t> intercepts;
  BelowRange below_neg_H = BelowRange::zero;

  // Derived from (H, K); rebuilt on load.
  std::vector<long double> real_slopes;
  std::vector<long double> real_intercepts;
  std::vector<std::int64_t> knots;  ///< x_i + H on the 2^-32 grid, i = 0..K
  std::int64_t h_raw = 0;
  std::uint64_t inv_gamma_raw = 0;  ///< K/(2H) on the 2^-32 grid

  int exponent(int i) const { return intercepts[static_cast<std::size_t>(i)] >> kMantissaBits; }
  std::int64_t intercept_mantissa(int i) const {
    return intercepts[static_cast<std::size_t>(i)] & ((1 << kMantissaBits) - 1);
  }
  double slope_value(int i) const;
  double intercept_value(int i) const;
  double knot(int i) const { return -H + gamma * i; }
  int output_scale_exp() const { return intercept_scale_exp - kGuardBits; }
  std::size_t storage_bits() const { return static_cast<std::size_t>(K) * (8 + 16); }

  /// Entries and header equal; derived caches are not compared.
  bool same_entries(const PwlExpTable& o) const;
};

/// Builds the table; throws contract_error for invalid (H, K) or an H that
/// overflows the segment exponent field.
PwlExpTable build_table(double H, int K, BelowRange below = BelowRange::zero);

/// Fixed-point shift-add evaluation; result is on output_scale_exp().
QValue eval(QValue x, const PwlExpTable& tbl);

/// Same interpolant with unquantized real coefficients.
long double eval_real(long double x, const PwlExpTable& tbl);

/// (2H/K)^2 / 8 * e^(2H/K).
double bound_eps_exp(double H, int K);

/// Analytic relative deviation of the quantized interpolant from the real one.
double coefficient_slack(const PwlExpTable& tbl);

constexpr std::size_t kLutHeaderBytes = 8 + 4 + 4 + 4;

std::vector<std::uint8_t> serialize(const PwlExpTable& tbl);
PwlExpTable deserialize(std::span<const std::uint8_t> bytes);

/// File helpers; throw std::runtime_error on I/O failure.
void save_table(const PwlExpTable& tbl, const std::filesystem::path& path);
PwlExpTable load_table(const std::filesystem::path& path);

}  // namespace nlspike
