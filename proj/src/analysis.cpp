#include "nlspike/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "nlspike/errors.hpp"
#include "nlspike/opcount.hpp"

namespace nlspike {

namespace {

struct RowStats {
  double sum_abs = 0.0;
  double max_abs = 0.0;
  double sum_rel = 0.0;
  std::int64_t n_rel = 0;
  double max_rel = 0.0;
  double stat = 0.0;
};

struct Cell {
  QBatch batch;
  std::vector<long double> oracle;  // row-major, same shape as batch
};

/// Reference outputs on the quantized inputs.
std::vector<long double> oracle_outputs(Operator op, const QBatch& b, double eps) {
  std::vector<long double> out(b.raw.size());
  for_each_index(b.rows, Exec::omp, [&](std::size_t r) {
    std::vector<long double> x(b.cols);
    for (std::size_t c = 0; c < b.cols; ++c) x[c] = std::ldexp(static_cast<long double>(b.raw[r * b.cols + c]), b.scale_exp);
    std::vector<long double> y;
    switch (op) {
      case Operator::softmax:
        y = oracle_softmax(x);
        break;
      case Operator::silu:
        y.resize(x.size());
        for (std::size_t c = 0; c < x.size(); ++c) y[c] = oracle_silu(x[c]);
        break;
      case Operator::rmsnorm:
        y = oracle_rmsnorm(x, eps);
        break;
      case Operator::layernorm:
        y = oracle_layernorm(x, eps);
        break;
    }
    std::copy(y.begin(), y.end(), out.begin() + static_cast<std::ptrdiff_t>(r * b.cols));
  });
  return out;
}

std::vector<double> evaluate(Operator op, const EvalKind& kind, const QBatch& b, const RunParams& p,
                             const NlsConfig& cfg) {
  if (!kind) return apply_rows(op, b, cfg, p.eps, Exec::omp);
  std::vector<double> out(b.raw.size());
  const BaselineParams bp{p.H, p.eps};
  for_each_index(b.rows, Exec::omp, [&](std::size_t r) {
    std::vector<double> x(b.cols);
    for (std::size_t c = 0; c < b.cols; ++c) x[c] = std::ldexp(static_cast<double>(b.raw[r * b.cols + c]), b.scale_exp);
    const auto y = baseline_eval(*kind, op, x, bp);
    std::copy(y.begin(), y.end(), out.begin() + static_cast<std::ptrdiff_t>(r * b.cols));
  });
  return out;
}

/// Whether coordinate c of row r falls under the bound's hypothesis.
bool in_bound_domain(Operator op, const QBatch& b, std::size_t r, std::size_t c, const RunParams& p,
                     long double row_max, long double row_mean) {
  const long double x = std::ldexp(static_cast<long double>(b.raw[r * b.cols + c]), b.scale_exp);
  const long double root_eps = std::sqrt(static_cast<long double>(p.eps));
  switch (op) {
    case Operator::softmax:
      return x - row_max + p.H >= -p.H;
    case Operator::silu:
      return true;
    case Operator::rmsnorm:
      return x != 0.0L && std::fabs(x) >= root_eps;
    case Operator::layernorm:
      return std::fabs(x - row_mean) >= root_eps;
  }
  return false;
}

RowStats row_stats(Operator op, const Cell& cell, const std::vector<double>& out, std::size_t r, bool with_stat,
                   const RunParams& p) {
  const auto& b = cell.batch;
  RowStats s;
  long double row_max = -std::numeric_limits<long double>::infinity();
  long double row_mean = 0.0L;
  for (std::size_t c = 0; c < b.cols; ++c) {
    const long double x = std::ldexp(static_cast<long double>(b.raw[r * b.cols + c]), b.scale_exp);
    row_max = std::max(row_max, x);
    row_mean += x;
  }
  row_mean /= static_cast<long double>(b.cols);

  for (std::size_t c = 0; c < b.cols; ++c) {
    const std::size_t i = r * b.cols + c;
    const long double y = cell.oracle[i];
    const long double err = std::fabs(static_cast<long double>(out[i]) - y);
    s.sum_abs += static_cast<double>(err);
    s.max_abs = std::max(s.max_abs, static_cast<double>(err));
    if (y != 0.0L) {
      const double rel = static_cast<double>(err / std::fabs(y));
      s.sum_rel += rel;
      ++s.n_rel;
      s.max_rel = std::max(s.max_rel, rel);
    }
    if (!with_stat || !in_bound_domain(op, b, r, c, p, row_max, row_mean)) continue;
    double st = 0.0;
    if (op == Operator::silu) {
      const long double x = std::ldexp(static_cast<long double>(b.raw[i]), b.scale_exp);
      st = x == 0.0L ? (err == 0.0L ? 0.0 : std::numeric_limits<double>::infinity())
                     : static_cast<double>(err / std::fabs(x));
    } else {
      st = y == 0.0L ? (err == 0.0L ? 0.0 : std::numeric_limits<double>::infinity())
                     : static_cast<double>(err / std::fabs(y));
    }
    s.stat = std::max(s.stat, st);
  }
  return s;
}

struct BoundPair {
  double bound;
  double slack;
};

BoundPair nls_bound(Operator op, int d, const NlsConfig& cfg, const QBatch& b, const RunParams& p) {
  const double eps_exp = bound_eps_exp(cfg.H, cfg.exp_table.K);
  const double delta = cfg.div.delta();
  const int n = cfg.div.n();
  auto finite_or_zero = [](double hi, double lo) { return std::isfinite(hi) && std::isfinite(lo) ? hi - lo : 0.0; };
  const double cs = coefficient_slack(cfg.exp_table);
  switch (op) {
    case Operator::softmax: {
      const double bd = bound_softmax(cfg);
      return {bd, finite_or_zero(bound_softmax_raw(eps_exp + cs, delta), bd)};
    }
    case Operator::silu: {
      const double bd = bound_silu_per_abs_x(eps_exp, delta);
      return {bd, finite_or_zero(bound_silu_per_abs_x(eps_exp + cs, delta), bd)};
    }
    case Operator::rmsnorm:
    case Operator::layernorm: {
      const double bd = bound_rms(d, cfg);
      const int height = tree_height(d + 1);
      double slack = std::ldexp(1.0, -16) + std::ldexp(1.0, -n - 7) +
                     height * cfg.cordic.n_iters * std::ldexp(1.0, -CordicConfig::kWorkingBits + 2);
      if (op == Operator::layernorm && !is_pow2(d)) {
        slack += std::ldexp(1.0, b.scale_exp - 24) / std::sqrt(p.eps);
      }
      return {bd, std::isfinite(bd) ? slack : 0.0};
    }
  }
  return {0.0, 0.0};
}

NlsConfig tampered(NlsConfig cfg) {
  auto& t = cfg.exp_table;
  const auto mid = static_cast<std::size_t>(t.K / 2);
  const std::uint16_t e = t.intercepts[mid] & ~std::uint16_t{(1 << PwlExpTable::kMantissaBits) - 1};
  const auto m = static_cast<std::uint16_t>(std::min(2047, static_cast<int>(t.intercept_mantissa(static_cast<int>(mid))) * 5 / 4));
  t.intercepts[mid] = static_cast<std::uint16_t>(e | m);
  return cfg;
}

ErrorReport make_report(Operator op, const EvalKind& kind, int d, std::int64_t samples, std::uint64_t seed,
                        const RunParams& p) {
  ErrorReport r;
  r.op = op;
  r.kind = kind_name(kind);
  r.d = d;
  r.H = p.H;
  r.K = p.K;
  r.T = p.T;
  r.L = p.L;
  r.samples = samples;
  r.seed = seed;
  return r;
}

std::vector<ErrorReport> sweep_cell(Operator op, std::span<const EvalKind> kinds, int d, std::int64_t samples,
                                    std::uint64_t seed, const RunParams& p, double std) {
  const NlsConfig cfg = p.tamper_table ? tampered(p.nls()) : p.nls();
  Cell cell;
  cell.batch = sample_inputs(op, d, samples, cell_seed(seed, op, d, p.H), p.H, std);
  cell.oracle = oracle_outputs(op, cell.batch, p.eps);

  std::vector<ErrorReport> out;
  for (const auto& kind : kinds) {
    if (kind && !supports(*kind, op)) {
      throw contract_error("baseline " + std::string(to_string(*kind)) + " does not apply to " +
                           std::string(to_string(op)));
    }
    const auto y = evaluate(op, kind, cell.batch, p, cfg);
    std::vector<RowStats> rows(cell.batch.rows);
    const bool with_stat = !kind.has_value();
    for_each_index(cell.batch.rows, Exec::omp,
                   [&](std::size_t r) { rows[r] = row_stats(op, cell, y, r, with_stat, p); });

    ErrorReport rep = make_report(op, kind, d, samples, seed, p);
    double sum_abs = 0.0, sum_rel = 0.0;
    std::int64_t n_rel = 0;
    for (const auto& s : rows) {  // fixed reduction order
      sum_abs += s.sum_abs;
      sum_rel += s.sum_rel;
      n_rel += s.n_rel;
      rep.max_abs = std::max(rep.max_abs, s.max_abs);
      rep.max_rel = std::max(rep.max_rel, s.max_rel);
      rep.stat = std::max(rep.stat, s.stat);
    }
    rep.mean_abs = sum_abs / static_cast<double>(cell.batch.raw.size());
    rep.mean_rel = n_rel > 0 ? sum_rel / static_cast<double>(n_rel) : 0.0;
    if (with_stat) {
      const auto bp = nls_bound(op, d, cfg, cell.batch, p);
      rep.bound = bp.bound;
      rep.slack = bp.slack;
      rep.pass = rep.stat <= bp.bound + bp.slack;
    }
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace

NlsConfig RunParams::nls() const { return NlsConfig::make(H, K, T, L, n_cordic); }

std::string kind_name(const EvalKind& k) { return k ? std::string(to_string(*k)) : std::string("nls"); }

QGrid input_grid(double H, double std) {
  const double R = std::max(H, 4.0 * std);
  return QGrid{8, static_cast<int>(std::ceil(std::log2(R / 127.0))), true};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t cell_seed(std::uint64_t master, Operator op, int d, double H) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ static_cast<std::uint64_t>(op));
  s = splitmix64(s ^ static_cast<std::uint64_t>(d));
  return splitmix64(s ^ std::bit_cast<std::uint64_t>(H));
}

QBatch sample_inputs(Operator op, int d, std::int64_t samples, std::uint64_t seed, double H, double std) {
  require(d >= 1 && samples >= 1, "sample_inputs: d and samples must be positive");
  const QGrid g = input_grid(H, std);
  const double R = std::max(H, 4.0 * std);
  const double lim = op == Operator::silu ? H : R;
  QBatch b;
  b.rows = static_cast<std::size_t>(samples);
  b.cols = static_cast<std::size_t>(d);
  b.scale_exp = g.scale_exp;
  b.raw.resize(b.rows * b.cols);
  for_each_index(b.rows, Exec::omp, [&](std::size_t r) {
    std::mt19937_64 rng(splitmix64(seed + r + 1));
    std::normal_distribution<double> normal(0.0, std);
    for (std::size_t c = 0; c < b.cols; ++c) {
      const double v = std::clamp(normal(rng), -lim, lim);
      std::int64_t q = quantize(v, g).value.raw;
      // Keep quantized values inside the clip range.
      while (std::ldexp(static_cast<double>(q), g.scale_exp) > lim) --q;
      while (std::ldexp(static_cast<double>(q), g.scale_exp) < -lim) ++q;
      b.raw[r * b.cols + c] = q;
    }
  });
  return b;
}

std::vector<EvalKind> default_kinds(Operator op) {
  std::vector<EvalKind> k{std::nullopt};
  for (auto b : baselines_for(op)) k.emplace_back(b);
  return k;
}

std::vector<ErrorReport> run_error_sweep(Operator op, std::span<const EvalKind> kinds, std::span<const int> dims,
                                         std::int64_t samples, std::uint64_t seed, const RunParams& params) {
  require(samples >= 1, "run_error_sweep: samples must be >= 1");
  std::vector<ErrorReport> all;
  for (int d : dims) {
    auto part = sweep_cell(op, kinds, d, samples, seed, params, params.logit_std);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

std::vector<ErrorReport> run_h_sensitivity(Operator op, std::span<const double> H_values, const RunParams& params,
                                           std::int64_t samples, std::uint64_t seed) {
  require(!H_values.empty(), "run_h_sensitivity: empty H list");
  require(op == Operator::silu || op == Operator::softmax, "run_h_sensitivity: operator must be silu or softmax");
  const EvalKind nls = std::nullopt;
  std::vector<ErrorReport> out;
  for (double H : H_values) {
    RunParams p = params;
    p.H = H;
    const double std = op == Operator::softmax ? params.sensitivity_logit_std : params.logit_std;
    auto part = sweep_cell(op, std::span<const EvalKind>(&nls, 1), params.sensitivity_dim, samples, seed, p, std);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

OpCountReport count_ops(Operator op, int d, int T, const RunParams& params) {
  require(T >= 1 && is_pow2(T), "count_ops: T must be a power of two");
  const NlsConfig cfg = params.nls();
  const QBatch b = sample_inputs(op, d, 1, cell_seed(0, op, d, params.H), params.H, params.logit_std);
  const auto x = b.row_values(0);

  OpTally tally;
  {
    OpScope scope(tally);
    if (op == Operator::silu) {
      for (int t = 0; t < T; ++t) {
        for (const auto& v : x) (void)nls_silu(v, cfg);
      }
    } else {
      // Integrate T presentations of each input; the 1/T rescale is an exponent change.
      std::vector<QValue> acc(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        std::int64_t s = x[i].raw;
        for (int t = 1; t < T; ++t) s += x[i].raw;
        ops::ac(static_cast<std::uint64_t>(T - 1));
        acc[i] = {s, x[i].scale_exp - log2_exact(T)};
      }
      switch (op) {
        case Operator::softmax:
          (void)nls_softmax(acc, cfg);
          break;
        case Operator::rmsnorm:
          (void)nls_rmsnorm(acc, params.eps, cfg);
          break;
        case Operator::layernorm:
          (void)nls_layernorm(acc, params.eps, cfg);
          break;
        case Operator::silu:
          break;
      }
    }
  }
  return {op, d, T, tally.macs, tally.acs, tally.shifts};
}

}  // namespace nlspike
