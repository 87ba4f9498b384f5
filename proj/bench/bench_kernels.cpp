#include <benchmark/benchmark.h>

#include "nlspike/analysis.hpp"
#include "nlspike/kernels.hpp"

using namespace nlspike;

namespace {

constexpr std::int64_t kRows = 256;

const NlsConfig& cfg() {
  static const NlsConfig c = NlsConfig::defaults();
  return c;
}

template <Operator Op, Exec E>
void BM_rows(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const QBatch b = sample_inputs(Op, d, kRows, 1, 5.0, 1.0);
  for (auto _ : state) {
    std::vector<double> out;
    if constexpr (Op == Operator::softmax) {
      out = E == Exec::serial ? softmax_rows_serial(b, cfg()) : softmax_rows_omp(b, cfg());
    } else if constexpr (Op == Operator::silu) {
      out = E == Exec::serial ? silu_rows_serial(b, cfg()) : silu_rows_omp(b, cfg());
    } else if constexpr (Op == Operator::rmsnorm) {
      out = E == Exec::serial ? rmsnorm_rows_serial(b, 1e-6, cfg()) : rmsnorm_rows_omp(b, 1e-6, cfg());
    } else {
      out = E == Exec::serial ? layernorm_rows_serial(b, 1e-6, cfg()) : layernorm_rows_omp(b, 1e-6, cfg());
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * kRows * d);
  state.counters["threads_cap"] = thread_cap();
}

}  // namespace

BENCHMARK(BM_rows<Operator::softmax, Exec::serial>)->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(BM_rows<Operator::softmax, Exec::omp>)->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(BM_rows<Operator::silu, Exec::serial>)->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(BM_rows<Operator::silu, Exec::omp>)->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(BM_rows<Operator::rmsnorm, Exec::serial>)->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(BM_rows<Operator::rmsnorm, Exec::omp>)->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(BM_rows<Operator::layernorm, Exec::serial>)->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(BM_rows<Operator::layernorm, Exec::omp>)->RangeMultiplier(4)->Range(16, 256);

BENCHMARK_MAIN();
