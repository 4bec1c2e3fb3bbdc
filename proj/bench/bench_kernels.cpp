// Serial vs OpenMP timings for the model's hot loops.

#include <benchmark/benchmark.h>

#include "miarec/kernels.hpp"
#include "miarec/numkernel.hpp"

using namespace miarec;
using namespace miarec::kernels;

namespace {

SparseRows sampled_graph(std::size_t n, std::size_t per_row, Rng& rng) {
  std::vector<std::vector<std::size_t>> rows(n);
  for (auto& r : rows)
    for (std::size_t k = 0; k < per_row; ++k) r.push_back(uniform_index(rng, n));
  return SparseRows::from_lists(n, rows);
}

template <void (*Kernel)(const Dense&, const Dense&, Dense&)>
void bm_matmul_bt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng = make_stream(1);
  const Dense a = xavier_init(n, 128, rng), b = xavier_init(64, 128, rng);
  Dense out(n, 64);
  for (auto _ : state) {
    Kernel(a, b, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <void (*Kernel)(const SparseRows&, std::span<const double>, const Dense&, Dense&)>
void bm_spmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng = make_stream(2);
  const SparseRows adj = sampled_graph(n, 10, rng);
  std::vector<double> coef(adj.nnz(), 0.1);
  const Dense h = xavier_init(n, 64, rng);
  Dense out(n, 64);
  for (auto _ : state) {
    Kernel(adj, coef, h, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <void (*Kernel)(const SparseRows&, std::span<const double>, const Dense&, Dense&)>
void bm_spmm_transpose(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng = make_stream(3);
  const SparseRows adj = sampled_graph(n, 10, rng);
  std::vector<double> coef(adj.nnz(), 0.1);
  const Dense g = xavier_init(n, 64, rng);
  Dense out(n, 64);
  for (auto _ : state) {
    out.fill(0.0);
    Kernel(adj, coef, g, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(bm_matmul_bt<serial::matmul_bt>)->Name("matmul_bt/serial")->Arg(1000)->Arg(10000);
BENCHMARK(bm_matmul_bt<omp::matmul_bt>)->Name("matmul_bt/omp")->Arg(1000)->Arg(10000);
BENCHMARK(bm_spmm<serial::spmm>)->Name("spmm/serial")->Arg(1000)->Arg(100000);
BENCHMARK(bm_spmm<omp::spmm>)->Name("spmm/omp")->Arg(1000)->Arg(100000);
BENCHMARK(bm_spmm_transpose<serial::spmm_transpose>)->Name("spmm_transpose/serial")->Arg(1000)->Arg(100000);
BENCHMARK(bm_spmm_transpose<omp::spmm_transpose>)->Name("spmm_transpose/omp")->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();
