#pragma once

#include <cstdint>

#include "nlspike/fixedq.hpp"
#include "nlspike/spikecode.hpp"

namespace nlspike {

/// Window length T and population size L, both powers of two.
struct DivisionGroupConfig {
  int T = 16;
  int L = 256;

  /// Validating constructor.
  static DivisionGroupConfig make(int T, int L);

  int n() const;                                    ///< log2(T*L)
  double delta() const;                             ///< 2^-n
  std::int64_t capacity() const { return std::int64_t{T} * L; }
};

/// How a run ends.
enum class Drain {
  window,         ///< stop after exactly T steps
  until_settled,  ///< keep stepping with zero input until the residual is below theta
};

struct DivisionResult {
  std::int64_t q = 0;
  bool clipped = false;    ///< some step wanted more than L firings
  bool saturated = false;  ///< residual potential still >= theta when the run ended
  int steps = 0;
};

/// Population of L neurons with ordered thresholds i*theta and subtractive
/// reset. Single-owner state advanced one step at a time.
class DivisionGroup {
 public:
  explicit DivisionGroup(DivisionGroupConfig cfg) : cfg_(cfg) {}

  /// First window: integrate the denominator, theta = I_B >> n.
  std::int64_t calibrate(const SpikeTrain& denominator);
  /// Use an already known theta (shared-denominator reuse).
  void set_theta(std::int64_t theta);

  /// Second window, one step of numerator current.
  void step(std::int64_t current);
  void reset_counts();

  std::int64_t theta() const { return theta_; }
  std::int64_t threshold(int i) const;  ///< i*theta for i in [1, L]
  std::int64_t residual() const { return residual_; }
  std::int64_t q() const { return q_; }
  bool clipped() const { return clipped_; }
  int steps() const { return steps_; }
  const DivisionGroupConfig& config() const { return cfg_; }

 private:
  DivisionGroupConfig cfg_;
  std::int64_t theta_ = 0;
  std::int64_t residual_ = 0;
  std::int64_t q_ = 0;
  bool clipped_ = false;
  int steps_ = 0;
};

/// theta = floor(sum(denominator) / 2^n); throws DenominatorUnderflow on zero.
std::int64_t calibrate(const SpikeTrain& denominator, const DivisionGroupConfig& cfg);

/// Drive a calibrated group with a numerator train of length T.
DivisionResult run(const SpikeTrain& numerator, std::int64_t theta, const DivisionGroupConfig& cfg,
                   Drain drain = Drain::window);

/// q * 2^-n.
QValue decode(std::int64_t q, const DivisionGroupConfig& cfg);

}  // namespace nlspike
