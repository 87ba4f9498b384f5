#include "nlspike/kernels.hpp"

#include <omp.h>

#include <cstdlib>
#include <mutex>
#include <string>

#include "nlspike/errors.hpp"

namespace nlspike {

std::vector<QValue> QBatch::row_values(std::size_t r) const {
  std::vector<QValue> v(cols);
  for (std::size_t c = 0; c < cols; ++c) v[c] = {raw[r * cols + c], scale_exp};
  return v;
}

int thread_cap() {
  if (const char* s = std::getenv("NLSPIKE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return omp_get_max_threads();
}

void for_each_index(std::size_t n, Exec ex, const std::function<void(std::size_t)>& body) {
  if (ex == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first;
  std::mutex m;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) num_threads(thread_cap())
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(m);
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
}

std::vector<double> apply_rows(Operator op, const QBatch& in, const NlsConfig& cfg, double eps, Exec ex) {
  require(in.raw.size() == in.rows * in.cols, "apply_rows: batch shape mismatch");
  std::vector<double> out(in.raw.size());
  if (op == Operator::silu) {
    for_each_index(in.raw.size(), ex, [&](std::size_t i) {
      out[i] = nls_silu(QValue{in.raw[i], in.scale_exp}, cfg).to_double();
    });
    return out;
  }
  for_each_index(in.rows, ex, [&](std::size_t r) {
    const auto x = in.row_values(r);
    std::vector<QValue> y;
    switch (op) {
      case Operator::softmax:
        y = nls_softmax(x, cfg);
        break;
      case Operator::rmsnorm:
        y = nls_rmsnorm(x, eps, cfg);
        break;
      case Operator::layernorm:
        y = nls_layernorm(x, eps, cfg);
        break;
      case Operator::silu:
        break;
    }
    for (std::size_t c = 0; c < in.cols; ++c) out[r * in.cols + c] = y[c].to_double();
  });
  return out;
}

std::vector<double> softmax_rows_serial(const QBatch& in, const NlsConfig& cfg) {
  return apply_rows(Operator::softmax, in, cfg, 0.0, Exec::serial);
}
std::vector<double> softmax_rows_omp(const QBatch& in, const NlsConfig& cfg) {
  return apply_rows(Operator::softmax, in, cfg, 0.0, Exec::omp);
}
std::vector<double> silu_rows_serial(const QBatch& in, const NlsConfig& cfg) {
  return apply_rows(Operator::silu, in, cfg, 0.0, Exec::serial);
}
std::vector<double> silu_rows_omp(const QBatch& in, const NlsConfig& cfg) {
  return apply_rows(Operator::silu, in, cfg, 0.0, Exec::omp);
}
std::vector<double> rmsnorm_rows_serial(const QBatch& in, double eps, const NlsConfig& cfg) {
  return apply_rows(Operator::rmsnorm, in, cfg, eps, Exec::serial);
}
std::vector<double> rmsnorm_rows_omp(const QBatch& in, double eps, const NlsConfig& cfg) {
  return apply_rows(Operator::rmsnorm, in, cfg, eps, Exec::omp);
}
std::vector<double> layernorm_rows_serial(const QBatch& in, double eps, const NlsConfig& cfg) {
  return apply_rows(Operator::layernorm, in, cfg, eps, Exec::serial);
}
std::vector<double> layernorm_rows_omp(const QBatch& in, double eps, const NlsConfig& cfg) {
  return apply_rows(Operator::layernorm, in, cfg, eps, Exec::omp);
}

}  // namespace nlspike
