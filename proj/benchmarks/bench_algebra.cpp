#include <benchmark/benchmark.h>

#include "iterlara/algebra.hpp"
#include "iterlara/cost.hpp"
#include "iterlara/eval.hpp"
#include "iterlara/stdlib.hpp"

using namespace iterlara;

namespace {

IntMatrix filled(std::size_t r, std::size_t c, std::int64_t seed) {
  IntMatrix m(r, std::vector<std::int64_t>(c));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m[i][j] = static_cast<std::int64_t>((i * 31 + j * 17 + seed) % 7) - 3;
  return m;
}

void BM_MatMul(benchmark::State& state) {
  auto n = static_cast<std::size_t>(state.range(0));
  auto a = matrix_from_dense(filled(n, n, 1));
  auto b = matrix_from_dense(filled(n, n, 2));
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MatMul)->RangeMultiplier(2)->Range(4, 64)->Complexity(benchmark::oNCubed);

void BM_Union(benchmark::State& state) {
  auto n = static_cast<std::size_t>(state.range(0));
  auto a = matrix_from_dense(filled(n, n, 1));
  auto b = matrix_from_dense(filled(n, n, 5));
  const BinaryFn& plus = builtin_registry().binary("plus");
  for (auto _ : state) benchmark::DoNotOptimize(union_tables(a, b, plus));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.size() + b.size()));
}
BENCHMARK(BM_Union)->RangeMultiplier(4)->Range(8, 256);

void BM_RelaxedJoin(benchmark::State& state) {
  auto n = static_cast<std::size_t>(state.range(0));
  auto a = matrix_from_dense(filled(n, n, 1));
  auto b = matrix_from_dense(filled(n, n, 3));
  const BinaryFn& times = builtin_registry().binary("times");
  for (auto _ : state) benchmark::DoNotOptimize(relaxed_join(a, b, times));
}
BENCHMARK(BM_RelaxedJoin)->RangeMultiplier(4)->Range(8, 256);

void BM_OpCountMatMul(benchmark::State& state) {
  auto n = static_cast<std::size_t>(state.range(0));
  Environment env{{"A", matrix_from_dense(filled(n, n, 1))}, {"B", matrix_from_dense(filled(n, n, 2))}};
  Expression e = matmul_expr(ir::ref("A"), ir::ref("B"));
  for (auto _ : state) benchmark::DoNotOptimize(op_count(e, env));
}
BENCHMARK(BM_OpCountMatMul)->RangeMultiplier(2)->Range(4, 32);

}  // namespace
