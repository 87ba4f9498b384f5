#include "nlspike/spikecode.hpp"

#include <algorithm>
#include <numeric>

#include "nlspike/errors.hpp"

namespace nlspike {

std::int64_t SpikeTrain::total() const {
  return std::accumulate(steps.begin(), steps.end(), std::int64_t{0});
}

bool SpikeTrain::is_binary() const {
  return std::all_of(steps.begin(), steps.end(), [](std::int64_t s) { return s == 0 || s == 1; });
}

EncodedTrain encode_rate(QValue v, int T, QValue theta) {
  require(T >= 1, "encode_rate: T must be >= 1");
  require(theta.raw > 0, "encode_rate: theta must be positive");
  require(v.raw >= 0, "encode_rate: value must be nonnegative");

  // round(v / theta) on a common exponent, ties away from zero.
  const int e = std::min(v.scale_exp, theta.scale_exp);
  const int128 num = static_cast<int128>(rescale(v, e).raw);
  const int128 den = static_cast<int128>(rescale(theta, e).raw);
  const int128 count = (2 * num + den) / (2 * den);

  EncodedTrain out;
  out.train.theta = theta;
  out.train.steps.assign(static_cast<std::size_t>(T), 0);
  std::int64_t n = static_cast<std::int64_t>(std::min<int128>(count, T));
  out.saturated = count > T;
  for (std::int64_t t = 0; t < n; ++t) out.train.steps[static_cast<std::size_t>(t)] = 1;
  return out;
}

SpikeTrain encode_currents(std::int64_t amount, int T, QValue theta) {
  require(T >= 1, "encode_currents: T must be >= 1");
  require(amount >= 0, "encode_currents: amount must be nonnegative");
  SpikeTrain tr;
  tr.theta = theta;
  tr.steps.assign(static_cast<std::size_t>(T), amount / T);
  const std::int64_t rem = amount % T;
  for (std::int64_t t = 0; t < rem; ++t) tr.steps[static_cast<std::size_t>(t)] += 1;
  return tr;
}

QValue decode_rate(const SpikeTrain& tr) { return {tr.total() * tr.theta.raw, tr.theta.scale_exp}; }

LifStep lif_step(const LifState& st, QValue input) {
  require(st.lambda.k >= 0 && st.lambda.p >= 0, "lif_step: invalid leak");
  const int e = std::min({st.v.scale_exp, input.scale_exp, st.theta.scale_exp});
  const std::int64_t v = rescale(st.v, e).raw;
  const std::int64_t leaked = floor_shift(v * st.lambda.p, st.lambda.k);
  std::int64_t vn = leaked + rescale(input, e).raw;
  const std::int64_t th = rescale(st.theta, e).raw;

  LifStep out;
  out.state = st;
  if (vn >= th) {
    out.spike = 1;
    vn -= th;
  }
  out.state.v = {vn, e};
  return out;
}

}  // namespace nlspike
