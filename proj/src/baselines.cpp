#include "nlspike/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "nlspike/errors.hpp"

namespace nlspike {

namespace {

constexpr std::array<std::string_view, 4> kOperatorNames = {"softmax", "silu", "rmsnorm", "layernorm"};
constexpr std::array<std::string_view, 12> kKindNames = {
    "oracle",        "hardmax",         "pade22",          "pwl_exp16", "pwl_sigmoid16", "pwl_sigmoid64",
    "blockwise_rms32", "blockwise_rms64", "relu",            "hardswish", "dorefa4b",      "xnor"};

double pade22_exp(double x) {
  const double x2 = x * x / 12.0;
  return (1.0 + x / 2.0 + x2) / (1.0 - x / 2.0 + x2);
}

/// k-segment endpoint interpolation of f on [lo, hi], clamped outside.
template <class F>
double pwl(F f, int k, double lo, double hi, double x) {
  const double g = (hi - lo) / k;
  x = std::clamp(x, lo, hi);
  const int i = std::clamp(static_cast<int>(std::floor((x - lo) / g)), 0, k - 1);
  const double x0 = lo + g * i;
  const double y0 = f(x0);
  const double y1 = f(x0 + g);
  return y0 + (y1 - y0) * (x - x0) / g;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> normalize(std::vector<double> v) {
  double s = 0.0;
  for (double e : v) s += e;
  for (double& e : v) e /= s;
  return v;
}

std::vector<double> blockwise_rms(std::span<const double> x, std::size_t block, double eps) {
  const std::size_t tiles = (x.size() + block - 1) / block;
  long double total = 0.0L;
  for (std::size_t t = 0; t < tiles; ++t) {
    long double tile = 0.0L;
    for (std::size_t i = t * block; i < std::min(x.size(), (t + 1) * block); ++i) {
      tile += static_cast<long double>(x[i]) * x[i];
    }
    total += tile;
  }
  const long double ms = total / static_cast<long double>(tiles * block);
  const long double scale = 1.0L / std::sqrt(ms + eps);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<double>(x[i] * scale);
  return out;
}

std::vector<long double> widen(std::span<const double> x) { return {x.begin(), x.end()}; }

std::vector<double> narrow(const std::vector<long double>& v) { return {v.begin(), v.end()}; }

}  // namespace

std::string_view to_string(Operator op) { return kOperatorNames[static_cast<std::size_t>(op)]; }
std::string_view to_string(BaselineKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<Operator> parse_operator(std::string_view s) {
  for (std::size_t i = 0; i < kOperatorNames.size(); ++i) {
    if (kOperatorNames[i] == s) return static_cast<Operator>(i);
  }
  return std::nullopt;
}

std::optional<BaselineKind> parse_baseline(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<BaselineKind>(i);
  }
  return std::nullopt;
}

std::vector<BaselineKind> baselines_for(Operator op) {
  switch (op) {
    case Operator::softmax:
      return {BaselineKind::hardmax, BaselineKind::pade22, BaselineKind::pwl_exp16};
    case Operator::silu:
      return {BaselineKind::relu,     BaselineKind::hardswish, BaselineKind::pwl_sigmoid16,
              BaselineKind::pwl_sigmoid64, BaselineKind::dorefa4b, BaselineKind::xnor};
    case Operator::rmsnorm:
      return {BaselineKind::blockwise_rms32, BaselineKind::blockwise_rms64};
    case Operator::layernorm:
      return {};
  }
  return {};
}

bool supports(BaselineKind k, Operator op) {
  if (k == BaselineKind::oracle) return true;
  const auto v = baselines_for(op);
  return std::find(v.begin(), v.end(), k) != v.end();
}

std::vector<long double> oracle_softmax(std::span<const long double> z) {
  require(!z.empty(), "oracle_softmax: empty input");
  const long double m = *std::max_element(z.begin(), z.end());
  std::vector<long double> out(z.size());
  long double s = 0.0L;
  for (std::size_t i = 0; i < z.size(); ++i) s += out[i] = std::exp(z[i] - m);
  for (auto& v : out) v /= s;
  return out;
}

long double oracle_silu(long double x) { return x / (1.0L + std::exp(-x)); }

std::vector<long double> oracle_rmsnorm(std::span<const long double> x, long double eps) {
  require(!x.empty(), "oracle_rmsnorm: empty input");
  long double ss = 0.0L;
  for (auto v : x) ss += v * v;
  const long double scale = 1.0L / std::sqrt(ss / static_cast<long double>(x.size()) + eps);
  std::vector<long double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * scale;
  return out;
}

std::vector<long double> oracle_layernorm(std::span<const long double> x, long double eps) {
  require(!x.empty(), "oracle_layernorm: empty input");
  long double mu = 0.0L;
  for (auto v : x) mu += v;
  mu /= static_cast<long double>(x.size());
  long double var = 0.0L;
  for (auto v : x) var += (v - mu) * (v - mu);
  var /= static_cast<long double>(x.size());
  const long double scale = 1.0L / std::sqrt(var + eps);
  std::vector<long double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mu) * scale;
  return out;
}

std::vector<double> baseline_eval(BaselineKind k, Operator op, std::span<const double> x,
                                  const BaselineParams& p) {
  if (!supports(k, op)) {
    throw contract_error(std::string("baseline ") + std::string(to_string(k)) + " does not apply to " +
                         std::string(to_string(op)));
  }
  require(!x.empty(), "baseline_eval: empty input");
  const double H = p.H;
  std::vector<double> out(x.size());

  if (k == BaselineKind::oracle) {
    const auto w = widen(x);
    switch (op) {
      case Operator::softmax:
        return narrow(oracle_softmax(w));
      case Operator::silu:
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<double>(oracle_silu(w[i]));
        return out;
      case Operator::rmsnorm:
        return narrow(oracle_rmsnorm(w, p.eps));
      case Operator::layernorm:
        return narrow(oracle_layernorm(w, p.eps));
    }
  }

  const double m = *std::max_element(x.begin(), x.end());
  switch (k) {
    case BaselineKind::hardmax: {
      const auto it = std::max_element(x.begin(), x.end());
      out[static_cast<std::size_t>(it - x.begin())] = 1.0;
      return out;
    }
    case BaselineKind::pade22:
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = pade22_exp(x[i] - m);
      return normalize(std::move(out));
    case BaselineKind::pwl_exp16:
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = x[i] - m + H;
        out[i] = s < -H ? 0.0 : pwl([](double v) { return std::exp(v); }, 16, -H, H, s);
      }
      return normalize(std::move(out));
    case BaselineKind::pwl_sigmoid16:
    case BaselineKind::pwl_sigmoid64: {
      const int segs = k == BaselineKind::pwl_sigmoid16 ? 16 : 64;
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * pwl(sigmoid, segs, -H, H, x[i]);
      return out;
    }
    case BaselineKind::blockwise_rms32:
      return blockwise_rms(x, 32, p.eps);
    case BaselineKind::blockwise_rms64:
      return blockwise_rms(x, 64, p.eps);
    case BaselineKind::relu:
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(0.0, x[i]);
      return out;
    case BaselineKind::hardswish:
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * std::clamp(x[i] + 3.0, 0.0, 6.0) / 6.0;
      return out;
    case BaselineKind::dorefa4b: {
      const double step = H / 7.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double q = std::clamp(std::round(x[i] * sigmoid(x[i]) / step), -7.0, 7.0);
        out[i] = q * step;
      }
      return out;
    }
    case BaselineKind::xnor: {
      double mean_abs = 0.0;
      for (double v : x) mean_abs += std::fabs(v);
      mean_abs /= static_cast<double>(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? mean_abs : (x[i] < 0.0 ? -mean_abs : 0.0);
      return out;
    }
    case BaselineKind::oracle:
      break;
  }
  throw contract_error("baseline_eval: unreachable kind");
}

}  // namespace nlspike
