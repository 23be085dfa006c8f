#include <benchmark/benchmark.h>

#include <cmath>

#include "monarch/butterfly.hpp"
#include "monarch/projection.hpp"
#include "monarch/random.hpp"

namespace {

using namespace monarch;

void BM_DenseMatvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto a = rng.matrix<double>(n, n);
  const auto x = rng.vector<double>(n);
  for (auto _ : state) benchmark::DoNotOptimize(matvec(a, std::span<const double>(x)));
  state.counters["flops"] = static_cast<double>(n * n);
}

void BM_MonarchMatvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t b = default_block_size(n);
  const auto m = random_monarch<double>(n, b, 2);
  Rng rng(3);
  const auto x = rng.vector<double>(n);
  for (auto _ : state) benchmark::DoNotOptimize(monarch_matvec(m, std::span<const double>(x)));
  state.counters["flops"] = static_cast<double>(monarch_flop_count(n, b));
}

void BM_Projection(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  const auto a = rng.matrix<double>(n, n);
  const std::size_t b = default_block_size(n);
  for (auto _ : state) benchmark::DoNotOptimize(project(a, b));
}

void BM_ButterflyMatvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto bm = random_butterfly<double>(n, 5);
  Rng rng(6);
  const auto x = rng.vector<double>(n);
  for (auto _ : state) benchmark::DoNotOptimize(butterfly_matvec(bm, std::span<const double>(x)));
}

void BM_DftButterfly(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = dft_butterfly(n);
  Rng rng(7);
  const auto x = rng.vector<cplx>(n);
  for (auto _ : state) {
    const auto px = d.bit_reversal.permute(std::span<const cplx>(x));
    benchmark::DoNotOptimize(butterfly_matvec(d.butterfly, std::span<const cplx>(px)));
  }
}

}  // namespace

BENCHMARK(BM_DenseMatvec)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK(BM_MonarchMatvec)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK(BM_Projection)->Arg(64)->Arg(256);
BENCHMARK(BM_ButterflyMatvec)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK(BM_DftButterfly)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK_MAIN();
