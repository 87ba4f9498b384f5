#pragma once

#include <cstdint>
#include <vector>

#include "nlspike/fixedq.hpp"

namespace nlspike {

/// Length-T sequence of nonnegative integer currents with a threshold scale.
struct SpikeTrain {
  std::vector<std::int64_t> steps;
  QValue theta{1, 0};

  int T() const { return static_cast<int>(steps.size()); }
  std::int64_t total() const;
  bool is_binary() const;
};

struct EncodedTrain {
  SpikeTrain train;
  bool saturated = false;
};

/// Binary rate code: round(v / theta) spikes clipped to [0, T], front-loaded.
EncodedTrain encode_rate(QValue v, int T, QValue theta);

/// Multi-count code of an integer amount split evenly over T steps,
/// remainder placed on the earliest steps.
SpikeTrain encode_currents(std::int64_t amount, int T, QValue theta = {1, 0});

/// (sum of steps) * theta.
QValue decode_rate(const SpikeTrain& tr);

/// Dyadic leak factor p / 2^k.
struct DyadicLeak {
  std::int64_t p = 1;
  int k = 0;
};

struct LifState {
  QValue v{0, 0};
  DyadicLeak lambda{};
  QValue theta{1, 0};
};

struct LifStep {
  LifState state;
  int spike = 0;
};

/// v' = lambda*v + I; spike when v' >= theta, then subtractive reset.
LifStep lif_step(const LifState& st, QValue input);

}  // namespace nlspike
