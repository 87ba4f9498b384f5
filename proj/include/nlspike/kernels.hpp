#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <vector>

#include "nlspike/baselines.hpp"
#include "nlspike/nlsops.hpp"

namespace nlspike {

/// Row-major matrix of raw integers on one shared grid.
struct QBatch {
  std::size_t rows = 0;
  std::size_t cols = 0;
  int scale_exp = 0;
  std::vector<std::int64_t> raw;

  std::span<const std::int64_t> row(std::size_t r) const { return {raw.data() + r * cols, cols}; }
  std::vector<QValue> row_values(std::size_t r) const;
};

enum class Exec { serial, omp };

/// Sweep thread count: NLSPIKE_THREADS when set to a positive integer,
/// otherwise the OpenMP default.
int thread_cap();

/// Runs body(i) for i in [0, n). The OpenMP variant uses a static schedule;
/// the first exception thrown by any iteration is rethrown afterwards.
void for_each_index(std::size_t n, Exec ex, const std::function<void(std::size_t)>& body);

/// Row-wise NLS operator; outputs decoded to double, row-major.
std::vector<double> apply_rows(Operator op, const QBatch& in, const NlsConfig& cfg, double eps, Exec ex);

std::vector<double> softmax_rows_serial(const QBatch& in, const NlsConfig& cfg);
std::vector<double> softmax_rows_omp(const QBatch& in, const NlsConfig& cfg);
std::vector<double> silu_rows_serial(const QBatch& in, const NlsConfig& cfg);
std::vector<double> silu_rows_omp(const QBatch& in, const NlsConfig& cfg);
std::vector<double> rmsnorm_rows_serial(const QBatch& in, double eps, const NlsConfig& cfg);
std::vector<double> rmsnorm_rows_omp(const QBatch& in, double eps, const NlsConfig& cfg);
std::vector<double> layernorm_rows_serial(const QBatch& in, double eps, const NlsConfig& cfg);
std::vector<double> layernorm_rows_omp(const QBatch& in, double eps, const NlsConfig& cfg);

}  // namespace nlspike
