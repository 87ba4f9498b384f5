#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace nlspike {

enum class Operator { softmax, silu, rmsnorm, layernorm };

enum class BaselineKind {
  oracle,
  hardmax,
  pade22,
  pwl_exp16,
  pwl_sigmoid16,
  pwl_sigmoid64,
  blockwise_rms32,
  blockwise_rms64,
  relu,
  hardswish,
  dorefa4b,
  xnor,
};

std::string_view to_string(Operator op);
std::string_view to_string(BaselineKind k);
std::optional<Operator> parse_operator(std::string_view s);
std::optional<BaselineKind> parse_baseline(std::string_view s);

/// Baselines defined for an operator, excluding the oracle.
std::vector<BaselineKind> baselines_for(Operator op);
bool supports(BaselineKind k, Operator op);

struct BaselineParams {
  double H = 5.0;
  double eps = 1e-6;
};

// Extended-precision references.
std::vector<long double> oracle_softmax(std::span<const long double> z);
long double oracle_silu(long double x);
std::vector<long double> oracle_rmsnorm(std::span<const long double> x, long double eps);
std::vector<long double> oracle_layernorm(std::span<const long double> x, long double eps);

/// Evaluates a baseline (or the oracle) on one input vector. SiLU kinds
/// treat the vector as a batch of independent activations.
std::vector<double> baseline_eval(BaselineKind k, Operator op, std::span<const double> x,
                                  const BaselineParams& p = {});

}  // namespace nlspike
