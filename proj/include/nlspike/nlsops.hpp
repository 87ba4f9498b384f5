#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nlspike/divneuron.hpp"
#include "nlspike/fixedq.hpp"
#include "nlspike/polarnorm.hpp"
#include "nlspike/pwlexp.hpp"

namespace nlspike {

struct NlsConfig {
  DivisionGroupConfig div{};
  PwlExpTable exp_table;
  CordicConfig cordic;
  double H = 5.0;

  /// Validating factory; the table is built with the zero policy.
  static NlsConfig make(double H, int K, int T, int L, int n_cordic);
  /// H=5, K=64, (T, L)=(16, 256), 8 CORDIC iterations.
  static NlsConfig defaults();
};

/// A denominator calibrated once and reused for many numerators.
///
/// The denominator is shifted into [2^(W-1), 2^W) with W = 2n + 8 and each
/// numerator into [S'/2, S') before its division window, so every quotient
/// count lies in [2^(n-1), 2^n]. The shifts are folded back into the output
/// exponent.
class SharedDivisor {
 public:
  SharedDivisor(QValue denominator, const DivisionGroupConfig& cfg);

  /// numerator / denominator for a nonnegative numerator.
  QValue divide(QValue numerator) const;

  std::int64_t theta() const { return theta_; }
  std::int64_t normalized_denominator() const { return den_; }
  int width_bits() const { return width_; }

 private:
  DivisionGroupConfig cfg_;
  std::int64_t den_ = 0;  ///< S' in [2^(W-1), 2^W)
  int den_exp_ = 0;       ///< value of S = S' * 2^den_exp_
  int width_ = 0;
  std::int64_t theta_ = 0;
};

std::vector<QValue> nls_softmax(std::span<const QValue> z, const NlsConfig& cfg);
QValue nls_silu(QValue x, const NlsConfig& cfg);
std::vector<QValue> nls_rmsnorm(std::span<const QValue> x, double eps, const NlsConfig& cfg);
std::vector<QValue> nls_layernorm(std::span<const QValue> x, double eps, const NlsConfig& cfg);

/// Magnitude of sqrt(d) on a 16-bit mantissa: {raw in [2^15, 2^16), scale}.
QValue sqrt_dim_constant(int d);

/// Primitive error scales and the three operator bounds. A bound is +inf
/// when its primitive relative error reaches 1.
struct BoundReport {
  double eps_exp = 0.0;
  double delta = 0.0;
  double eps_pol = 0.0;  ///< for the requested d (augmented tree)
  double softmax = 0.0;
  double silu_per_abs_x = 0.0;
  double rms = 0.0;
};

double bound_softmax(const NlsConfig& cfg);
double bound_silu(double x, const NlsConfig& cfg);
double bound_rms(int d, const NlsConfig& cfg);
BoundReport bounds(int d, const NlsConfig& cfg);

double bound_softmax_raw(double eps_exp, double delta);
double bound_silu_per_abs_x(double eps_exp, double delta);
double bound_rms_raw(double eps_pol, double delta, int d);

}  // namespace nlspike
