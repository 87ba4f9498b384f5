#include "nlspike/divneuron.hpp"

#include <algorithm>
#include <cmath>

#include "nlspike/errors.hpp"
#include "nlspike/opcount.hpp"

namespace nlspike {

DivisionGroupConfig DivisionGroupConfig::make(int T, int L) {
  require(is_pow2(T), "division group: T must be a power of two");
  require(is_pow2(L), "division group: L must be a power of two");
  require(log2_exact(T) + log2_exact(L) <= 24, "division group: T*L exceeds 2^24");
  return {T, L};
}

int DivisionGroupConfig::n() const { return log2_exact(T) + log2_exact(L); }

double DivisionGroupConfig::delta() const { return std::ldexp(1.0, -n()); }

std::int64_t DivisionGroup::calibrate(const SpikeTrain& denominator) {
  require(denominator.T() == cfg_.T, "calibrate: denominator window length must equal T");
  std::int64_t acc = 0;
  for (auto s : denominator.steps) {
    require(s >= 0, "calibrate: currents must be nonnegative");
    acc += s;
  }
  ops::ac(static_cast<std::uint64_t>(cfg_.T));
  const int n = cfg_.n();
  const std::int64_t theta = floor_shift(acc, n);
  ops::shift();
  if (theta == 0) throw DenominatorUnderflow(acc, std::int64_t{1} << n);
  // Thresholds 2θ..Lθ by repeated addition.
  ops::ac(static_cast<std::uint64_t>(cfg_.L - 1));
  theta_ = theta;
  reset_counts();
  return theta;
}

void DivisionGroup::set_theta(std::int64_t theta) {
  require(theta >= 1, "division group: theta must be >= 1");
  theta_ = theta;
  reset_counts();
}

void DivisionGroup::reset_counts() {
  residual_ = 0;
  q_ = 0;
  clipped_ = false;
  steps_ = 0;
}

std::int64_t DivisionGroup::threshold(int i) const {
  require(i >= 1 && i <= cfg_.L, "threshold index out of range");
  return theta_ * i;
}

void DivisionGroup::step(std::int64_t current) {
  require(theta_ >= 1, "division group: not calibrated");
  require(current >= 0, "division group: currents must be nonnegative");
  residual_ += current;
  // Neurons whose threshold i*θ is reached fire together; at most L per step.
  const std::int64_t want = residual_ / theta_;
  const std::int64_t fired = std::min<std::int64_t>(want, cfg_.L);
  if (want > cfg_.L) clipped_ = true;
  residual_ -= fired * theta_;
  q_ += fired;
  ++steps_;
  // integrate, L compares, reset subtract, count accumulate
  ops::ac(static_cast<std::uint64_t>(cfg_.L) + 3);
}

std::int64_t calibrate(const SpikeTrain& denominator, const DivisionGroupConfig& cfg) {
  DivisionGroup g(cfg);
  return g.calibrate(denominator);
}

DivisionResult run(const SpikeTrain& numerator, std::int64_t theta, const DivisionGroupConfig& cfg,
                   Drain drain) {
  require(theta >= 1, "run: theta must be >= 1");
  require(numerator.T() == cfg.T, "run: numerator window length must equal T");
  DivisionGroup g(cfg);
  g.set_theta(theta);
  for (auto s : numerator.steps) g.step(s);
  if (drain == Drain::until_settled) {
    while (g.residual() >= theta) g.step(0);
  }
  DivisionResult r;
  r.q = g.q();
  r.clipped = g.clipped();
  r.saturated = g.residual() >= theta;
  r.steps = g.steps();
  return r;
}

QValue decode(std::int64_t q, const DivisionGroupConfig& cfg) { return {q, -cfg.n()}; }

}  // namespace nlspike
