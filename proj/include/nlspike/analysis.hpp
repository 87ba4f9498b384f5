#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlspike/baselines.hpp"
#include "nlspike/kernels.hpp"
#include "nlspike/nlsops.hpp"

namespace nlspike {

/// Shared experiment knobs.
struct RunParams {
  double H = 5.0;
  int K = 64;
  int T = 16;
  int L = 256;
  int n_cordic = 8;
  double eps = 1e-6;             ///< RMSNorm / LayerNorm epsilon
  double logit_std = 1.0;        ///< sampling std for every operator
  double sensitivity_logit_std = 3.0;  ///< Softmax std inside run_h_sensitivity
  int sensitivity_dim = 64;
  /// Negative control: corrupt one table segment after building.
  bool tamper_table = false;

  NlsConfig nls() const;
};

/// nullopt selects the NLS operator, otherwise a baseline.
using EvalKind = std::optional<BaselineKind>;
std::string kind_name(const EvalKind& k);

struct ErrorReport {
  Operator op = Operator::softmax;
  std::string kind;
  int d = 0;
  double H = 0.0;
  int K = 0;
  int T = 0;
  int L = 0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  double mean_abs = 0.0;
  double max_abs = 0.0;
  double mean_rel = 0.0;
  double max_rel = 0.0;
  std::optional<double> bound;  ///< NLS rows only; SiLU values are per unit |x|
  std::optional<double> slack;
  std::optional<bool> pass;
  double stat = 0.0;  ///< statistic compared with bound + slack
};

struct OpCountReport {
  Operator op = Operator::softmax;
  int d = 0;
  int T = 0;
  std::uint64_t macs = 0;
  std::uint64_t acs = 0;
  std::uint64_t shifts = 0;
};

/// 8-bit signed grid covering [-R, R], R = max(H, 4*std).
QGrid input_grid(double H, double std);

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t cell_seed(std::uint64_t master, Operator op, int d, double H);

/// Seeded i.i.d. normal inputs, clipped to the operator domain and quantized.
QBatch sample_inputs(Operator op, int d, std::int64_t samples, std::uint64_t seed, double H, double std);

std::vector<ErrorReport> run_error_sweep(Operator op, std::span<const EvalKind> kinds, std::span<const int> dims,
                                         std::int64_t samples, std::uint64_t seed, const RunParams& params);

std::vector<ErrorReport> run_h_sensitivity(Operator op, std::span<const double> H_values, const RunParams& params,
                                           std::int64_t samples, std::uint64_t seed);

/// Counts for one evaluation under direct encoding over T timesteps.
OpCountReport count_ops(Operator op, int d, int T, const RunParams& params);

/// NLS followed by every baseline of the operator.
std::vector<EvalKind> default_kinds(Operator op);

}  // namespace nlspike
