// nlspike: experiment runner for the integer-only nonlinear operators.
//
// Exit codes: 0 success, 1 bound failure, 2 usage error, 3 I/O error.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlspike/analysis.hpp"
#include "nlspike/errors.hpp"
#include "nlspike/pwlexp.hpp"
#include "nlspike/report.hpp"

using namespace nlspike;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBound = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunSpec {
  std::string op_name;
  std::vector<int> dims;
  std::vector<std::string> kinds;
  double H = 5.0;
  int K = 64;
  int T = 16;
  int L = 256;
  int n_cordic = 8;
  std::int64_t samples = 10000;
  std::uint64_t seed = 7;
  double eps = 1e-6;
  std::string out;
  std::string format = "csv";
  std::vector<double> h_values{3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<int> t_values{1, 2, 4};
  int sens_dim = 64;
  bool tamper = false;
  std::string inspect;

  RunParams params() const {
    RunParams p;
    p.H = H;
    p.K = K;
    p.T = T;
    p.L = L;
    p.n_cordic = n_cordic;
    p.eps = eps;
    p.sensitivity_dim = sens_dim;
    p.tamper_table = tamper;
    return p;
  }
};

void add_config_options(CLI::App* sub, RunSpec& s) {
  sub->add_option("--H", s.H, "clipping half-interval")->capture_default_str();
  sub->add_option("--K", s.K, "PWL segment count (power of two)")->capture_default_str();
  sub->add_option("--T", s.T, "division window length")->capture_default_str();
  sub->add_option("--L", s.L, "division population size")->capture_default_str();
  sub->add_option("--n-cordic", s.n_cordic, "CORDIC iterations")->capture_default_str();
  sub->add_option("--eps", s.eps, "normalization epsilon")->capture_default_str();
}

void add_sampling_options(CLI::App* sub, RunSpec& s) {
  sub->add_option("--samples", s.samples, "samples per cell")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--seed", s.seed, "master seed")->capture_default_str();
}

void add_output_options(CLI::App* sub, RunSpec& s, bool svg) {
  sub->add_option("--out", s.out, "output file (stdout when omitted)");
  auto* f = sub->add_option("--format", s.format, "output format")->capture_default_str();
  if (svg) {
    f->check(CLI::IsMember({"csv", "json", "svg"}));
  } else {
    f->check(CLI::IsMember({"csv", "json"}));
  }
}

Operator need_operator(const std::string& name) {
  const auto op = parse_operator(name);
  if (!op) throw usage_error("unknown operator '" + name + "'");
  return *op;
}

std::vector<EvalKind> resolve_kinds(Operator op, const std::vector<std::string>& names) {
  if (names.empty()) return default_kinds(op);
  std::vector<EvalKind> out;
  for (const auto& n : names) {
    if (n == "nls") {
      out.emplace_back(std::nullopt);
      continue;
    }
    const auto k = parse_baseline(n);
    if (!k) throw usage_error("unknown kind '" + n + "'");
    if (!supports(*k, op)) throw usage_error("kind '" + n + "' does not apply to " + std::string(to_string(op)));
    out.emplace_back(*k);
  }
  return out;
}

std::vector<int> default_dims(Operator op) {
  if (op == Operator::silu) return {1};
  return {8, 16, 32, 64, 128, 256};
}

void emit(const RunSpec& s, const std::string& text) {
  if (s.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  write_text_file(s.out, text);
}

std::string render(const RunSpec& s, const std::vector<ErrorReport>& rows, const std::string& x_key,
                   const std::string& title) {
  if (s.format == "json") return reports_to_json(rows);
  if (s.format == "svg") return reports_to_svg(rows, x_key, title);
  return reports_to_csv(rows);
}

std::string describe(const ErrorReport& r) {
  std::ostringstream os;
  os << "operator=" << to_string(r.op) << " kind=" << r.kind << " d=" << r.d << " H=" << format_number(r.H)
     << " stat=" << format_number(r.stat) << " bound=" << format_number(r.bound.value_or(0))
     << " slack=" << format_number(r.slack.value_or(0))
     << " margin=" << format_number(r.bound.value_or(0) + r.slack.value_or(0) - r.stat);
  return os.str();
}

int report_failures(const std::vector<ErrorReport>& rows) {
  int rc = kExitOk;
  for (const auto& r : rows) {
    if (r.pass && !*r.pass) {
      std::cerr << "bound violated: " << describe(r) << '\n';
      rc = kExitBound;
    }
  }
  return rc;
}

int cmd_bench_op(const RunSpec& s) {
  const Operator op = need_operator(s.op_name);
  const auto kinds = resolve_kinds(op, s.kinds);
  const auto dims = s.dims.empty() ? default_dims(op) : s.dims;
  const auto rows = run_error_sweep(op, kinds, dims, s.samples, s.seed, s.params());
  emit(s, render(s, rows, "d", std::string(to_string(op)) + " error vs d"));
  return report_failures(rows);
}

double stat_of(const std::vector<ErrorReport>& rows, double H, bool max) {
  for (const auto& r : rows) {
    if (r.H == H) return max ? r.max_abs : r.mean_abs;
  }
  return -1.0;
}

int cmd_sweep_h(const RunSpec& s) {
  const Operator op = need_operator(s.op_name);
  if (op != Operator::silu && op != Operator::softmax) throw usage_error("sweep-h supports silu and softmax");
  const auto rows = run_h_sensitivity(op, s.h_values, s.params(), s.samples, s.seed);
  emit(s, render(s, rows, "H", std::string(to_string(op)) + " error vs H"));

  const auto has = [&](double h) {
    return std::find(s.h_values.begin(), s.h_values.end(), h) != s.h_values.end();
  };
  if (op == Operator::silu && has(5) && has(10)) {
    const double a = stat_of(rows, 5, true), b = stat_of(rows, 10, true);
    std::cerr << "trend silu max_abs: H=5 " << format_number(a) << ", H=10 " << format_number(b)
              << (b > a ? " (grows)" : " (does not grow)") << '\n';
  }
  if (op == Operator::softmax && has(3) && has(4) && has(5)) {
    const double a = stat_of(rows, 3, false), b = stat_of(rows, 4, false), c = stat_of(rows, 5, false);
    std::cerr << "trend softmax mean_abs: H=3 " << format_number(a) << ", H=4 " << format_number(b) << ", H=5 "
              << format_number(c) << (a > b && b > c ? " (decreasing)" : " (not decreasing)") << '\n';
  }
  return report_failures(rows);
}

int cmd_verify_bounds(const RunSpec& s) {
  const RunParams p = s.params();
  const auto dims = s.dims.empty() ? default_dims(Operator::softmax) : s.dims;
  const std::vector<int> silu_dims{1};
  const EvalKind nls = std::nullopt;

  std::vector<ErrorReport> all;
  int rc = kExitOk;
  std::printf("%-8s %-13s %-13s %-13s %-5s %s\n", "operator", "bound", "empirical", "slack", "pass", "margin");
  for (Operator op : {Operator::softmax, Operator::silu, Operator::rmsnorm}) {
    const auto& ds = op == Operator::silu ? silu_dims : dims;
    const auto rows = run_error_sweep(op, std::span<const EvalKind>(&nls, 1), ds, s.samples, s.seed, p);
    // The row with the smallest margin represents the operator.
    const ErrorReport* worst = nullptr;
    double worst_margin = 0.0;
    for (const auto& r : rows) {
      const double m = r.bound.value_or(0) + r.slack.value_or(0) - r.stat;
      if (!worst || m < worst_margin) worst = &r, worst_margin = m;
    }
    const bool ok = std::all_of(rows.begin(), rows.end(), [](const ErrorReport& r) { return r.pass.value_or(false); });
    std::printf("%-8s %-13.6e %-13.6e %-13.6e %-5s %.6e (d=%d)\n", std::string(to_string(op)).c_str(),
                worst->bound.value_or(0), worst->stat, worst->slack.value_or(0), ok ? "pass" : "FAIL", worst_margin,
                worst->d);
    if (!ok) {
      rc = kExitBound;
      for (const auto& r : rows) {
        if (!r.pass.value_or(false)) std::fprintf(stderr, "bound violated: %s\n", describe(r).c_str());
      }
    }
    all.insert(all.end(), rows.begin(), rows.end());
  }
  std::fflush(stdout);
  if (!s.out.empty()) write_text_file(s.out, s.format == "json" ? reports_to_json(all) : reports_to_csv(all));
  return rc;
}

int cmd_opcount(const RunSpec& s) {
  const RunParams p = s.params();
  std::vector<Operator> ops;
  if (s.op_name.empty()) {
    ops = {Operator::softmax, Operator::silu, Operator::rmsnorm, Operator::layernorm};
  } else {
    ops = {need_operator(s.op_name)};
  }
  const auto dims = s.dims.empty() ? std::vector<int>{64} : s.dims;
  std::vector<OpCountReport> rows;
  for (Operator op : ops) {
    for (int d : dims) {
      for (int T : s.t_values) rows.push_back(count_ops(op, d, T, p));
    }
  }
  emit(s, s.format == "json" ? opcounts_to_json(rows) : opcounts_to_csv(rows));
  return kExitOk;
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

int cmd_emit_lut(const RunSpec& s) {
  if (!s.inspect.empty()) {
    const auto bytes = read_bytes(s.inspect);
    const PwlExpTable t = deserialize(bytes);
    const bool round_trip = serialize(t) == bytes;
    const bool matches_build = t.same_entries(build_table(t.H, t.K, t.below_neg_H));
    std::printf("file %s: %zu bytes, H=%s K=%d slope_scale_exp=%d intercept_scale_exp=%d\n", s.inspect.c_str(),
                bytes.size(), format_number(t.H).c_str(), t.K, t.slope_scale_exp, t.intercept_scale_exp);
    std::printf("round-trip %s, rebuild %s\n", round_trip ? "identical" : "DIFFERS",
                matches_build ? "identical" : "DIFFERS");
    std::printf("%4s %12s %6s %6s %4s %14s %14s\n", "i", "knot", "slope", "mant", "E", "a_i", "b_i");
    for (int i = 0; i < t.K; ++i) {
      std::printf("%4d %12.6f %6u %6lld %4d %14.8e %14.8e\n", i, t.knot(i), t.slopes[static_cast<std::size_t>(i)],
                  static_cast<long long>(t.intercept_mantissa(i)), t.exponent(i), t.slope_value(i),
                  t.intercept_value(i));
    }
    std::printf("%4d %12.6f\n", t.K, t.knot(t.K));
    return round_trip ? kExitOk : kExitIo;
  }
  if (s.out.empty()) throw usage_error("emit-lut needs --out or --inspect");
  const PwlExpTable t = build_table(s.H, s.K);
  save_table(t, s.out);
  std::printf("wrote %s: %zu bytes (header %zu + %d slopes + %d intercept bytes)\n", s.out.c_str(),
              kLutHeaderBytes + static_cast<std::size_t>(3 * t.K), kLutHeaderBytes, t.K, 2 * t.K);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integer-only spiking nonlinearities: error sweeps, bound checks, op counts, LUT export"};
  app.require_subcommand(1);
  RunSpec s;

  auto* bench = app.add_subcommand("bench-op", "error sweep of NLS and baselines over dimensions");
  bench->add_option("--operator", s.op_name, "softmax | silu | rmsnorm | layernorm")->required();
  bench->add_option("--dims", s.dims, "comma-separated dimensions")->delimiter(',');
  bench->add_option("--kinds", s.kinds, "comma-separated kinds (nls or baseline tags)")->delimiter(',');
  add_config_options(bench, s);
  add_sampling_options(bench, s);
  add_output_options(bench, s, true);
  bench->add_flag("--tamper-table", s.tamper)->group("");

  auto* sweep = app.add_subcommand("sweep-h", "NLS error against the clipping interval H");
  sweep->add_option("--operator", s.op_name, "silu | softmax")->required();
  sweep->add_option("--h-values", s.h_values, "comma-separated H values")->delimiter(',')->capture_default_str();
  sweep->add_option("--dim", s.sens_dim, "vector length per sample")->capture_default_str();
  add_config_options(sweep, s);
  add_sampling_options(sweep, s);
  add_output_options(sweep, s, true);

  auto* verify = app.add_subcommand("verify-bounds", "empirical error against the analytic bounds");
  verify->add_option("--dims", s.dims, "comma-separated dimensions")->delimiter(',');
  add_config_options(verify, s);
  add_sampling_options(verify, s);
  add_output_options(verify, s, false);
  verify->add_flag("--tamper-table", s.tamper)->group("");

  auto* opc = app.add_subcommand("opcount", "MAC/AC/shift counts per operator and T");
  opc->add_option("--operator", s.op_name, "restrict to one operator");
  opc->add_option("--dims", s.dims, "comma-separated dimensions")->delimiter(',');
  opc->add_option("--T-values", s.t_values, "comma-separated timestep counts")->delimiter(',')->capture_default_str();
  add_config_options(opc, s);
  add_output_options(opc, s, false);

  auto* lut = app.add_subcommand("emit-lut", "write or inspect a PWL exponential table");
  lut->add_option("--H", s.H, "clipping half-interval")->capture_default_str();
  lut->add_option("--K", s.K, "segment count (power of two)")->capture_default_str();
  lut->add_option("--out", s.out, "table file to write");
  lut->add_option("--inspect", s.inspect, "table file to load and print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (bench->parsed()) return cmd_bench_op(s);
    if (sweep->parsed()) return cmd_sweep_h(s);
    if (verify->parsed()) return cmd_verify_bounds(s);
    if (opc->parsed()) return cmd_opcount(s);
    if (lut->parsed()) return cmd_emit_lut(s);
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const contract_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DenominatorUnderflow& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBound;
  } catch (const std::exception& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
