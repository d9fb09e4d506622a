#include <benchmark/benchmark.h>

#include "iterlara/bf.hpp"
#include "iterlara/stdlib.hpp"

using namespace iterlara;

namespace {

IntMatrix sample(std::size_t n) {
  IntMatrix m(n, std::vector<std::int64_t>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i][j] = static_cast<std::int64_t>((i * 5 + j * 3 + i * j) % 7) - 3;
  return m;
}

void BM_DetCount(benchmark::State& state) {
  auto t = matrix_occupancy(sample(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(det_count(t));
}
BENCHMARK(BM_DetCount)->DenseRange(2, 6);

void BM_DetFixed(benchmark::State& state) {
  auto n = state.range(0);
  auto t = matrix_from_dense(sample(static_cast<std::size_t>(n)));
  for (auto _ : state) benchmark::DoNotOptimize(det_fixed(t, n));
}
BENCHMARK(BM_DetFixed)->DenseRange(2, 6);

void BM_InvCount(benchmark::State& state) {
  IntMatrix m = sample(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < m.size(); ++i) m[i][i] += 10;  // keep it invertible
  auto t = matrix_occupancy(m);
  for (auto _ : state) benchmark::DoNotOptimize(inv_count(t));
}
BENCHMARK(BM_InvCount)->DenseRange(2, 5);

// Nested multiply: 3 * k outer passes.
std::string multiply(int k) { return std::string(static_cast<std::size_t>(k), '+') + "[>+++[>+<-]<-]>>."; }

void BM_BfInterpreter(benchmark::State& state) {
  BFProgram p = parse_bf(multiply(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(interpret_bf(p, {}, 1'000'000));
}
BENCHMARK(BM_BfInterpreter)->Arg(2)->Arg(8)->Arg(32);

void BM_BfViaAlgebra(benchmark::State& state) {
  BFProgram p = parse_bf(multiply(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(run_bf_via_iterlara(p, {}, 1'000'000));
}
BENCHMARK(BM_BfViaAlgebra)->Arg(2)->Arg(8)->Arg(32);

}  // namespace
