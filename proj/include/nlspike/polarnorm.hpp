#pragma once

#include <cstdint>
#include <span>

#include "nlspike/fixedq.hpp"

namespace nlspike {

/// Vectoring CORDIC with iterations i = 0..n_iters-1 and exact gain removal.
struct CordicConfig {
  static constexpr int kGainFrac = 32;
  /// Working magnitude is normalized to this many bits before iterating.
  static constexpr int kWorkingBits = 40;

  int n_iters = 8;
  std::uint64_t gain_inv_raw = 0;  ///< round(1/K_n * 2^32)

  static CordicConfig make(int n_iters);
  double gain_inv() const;
};

/// 1/K_n = prod_{i<n} (1 + 2^-2i)^(-1/2), host precision.
long double cordic_gain_inv(int n_iters);

/// Fixed-point hypot of (|a|, |b|).
QValue hypot(QValue a, QValue b, const CordicConfig& cfg);

/// sqrt(sum x_i^2 + eps*d) by a balanced pairwise tree over
/// x augmented with sqrt(eps*d) and zero-padded to a power of two.
QValue tree_norm(std::span<const QValue> x, double eps, const CordicConfig& cfg);

/// Same recurrences with real-valued state and exact gain.
long double hypot_real(long double a, long double b, int n_iters);
long double tree_norm_real(std::span<const long double> x, long double eps, int n_iters);

/// ceil(log2 d) * 2^(-2n-1).
double bound_eps_pol(int d, int n);

/// 2^(-2n-1).
double bound_eps_pair(int n);

/// Worst-case relative shortfall of an n-iteration vectoring CORDIC,
/// 1 - cos(atan 2^-(n-1)): the residual angle is at most the last step angle.
double residual_angle_bound(int n);

/// Tree height for D leaves after augmentation, ceil(log2 D).
int tree_height(int leaves);

}  // namespace nlspike
