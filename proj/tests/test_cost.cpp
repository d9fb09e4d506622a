#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "iterlara/cost.hpp"
#include "iterlara/dsl.hpp"
#include "iterlara/error.hpp"
#include "iterlara/stdlib.hpp"
#include "support.hpp"

using namespace iterlara;
using support::Gen;
using support::I;

namespace {

IntMatrix dense(std::size_t r, std::size_t c, std::int64_t seed) {
  IntMatrix m(r, std::vector<std::int64_t>(c));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m[i][j] = 1 + static_cast<std::int64_t>((i * 7 + j * 3 + seed) % 5);
  return m;
}

AssociativeTable drop_one(Gen& g, const AssociativeTable& t) {
  if (t.empty()) return t;
  std::size_t skip = g.index(t.size());
  std::vector<Record> recs;
  for (std::size_t r = 0; r < t.size(); ++r)
    if (r != skip) recs.push_back(t.record(r));
  return new_table(t.schema(), recs);
}

}  // namespace

TEST(Cost, MatMulIsTwoMNL) {
  for (std::size_t m = 1; m <= 4; ++m)
    for (std::size_t n = 1; n <= 4; ++n)
      for (std::size_t l = 1; l <= 4; ++l) {
        Environment env{{"A", matrix_from_dense(dense(m, n, 1))}, {"B", matrix_from_dense(dense(n, l, 2))}};
        auto r = op_count(matmul_expr(ir::ref("A"), ir::ref("B")), env);
        EXPECT_EQ(r.exact, 2 * m * n * l);
        EXPECT_EQ(r.upper_bound, r.exact);
      }
}

TEST(Cost, LiteralsAndRelationalOperatorsAreFree) {
  auto t = vector_from_dense(std::vector<std::int64_t>{1, 2, 3});
  EXPECT_EQ(op_count(ir::lit(t), {}).exact, 0u);
  EXPECT_EQ(op_count(ir::lit(t), {}).upper_bound, 0u);
  Environment env{{"A", t}};
  EXPECT_EQ(op_count(parse_expression("project[i, v](rename[v -> v](select[v > 1](A)))"), env).exact, 0u);
}

TEST(Cost, UnionJoinExtFormulas) {
  Environment env{{"A", vector_from_dense(std::vector<std::int64_t>{1, 2, 3})},
                  {"B", vector_from_dense(std::vector<std::int64_t>{0, 5})}};
  EXPECT_EQ(op_count(parse_expression("union[plus](A, B)"), env).exact, 4u);  // stored records 3 + 1
  EXPECT_EQ(op_count(parse_expression("join[times](A, B)"), env).exact, 1u);  // one matched key
  EXPECT_EQ(op_count(parse_expression("map[scale(2)](A)"), env).exact, 3u);
  EXPECT_EQ(op_count(parse_expression("ext[reshape(1)](A)"), env).exact, 0u);  // index rewriting is free
  EXPECT_EQ(op_count(parse_expression("agg[plus](A)"), env).exact, 3u);
}

TEST(Cost, IterIsRejected) {
  Environment env{{"A", vector_from_dense(std::vector<std::int64_t>{1})}};
  auto e = parse_expression("iter[(e) => map[scale(2)](e); lt(sum(e), 10)](A)");
  EXPECT_EQ(support::error_code([&] { op_count(e, env); }), ErrorCode::UnboundedIteration);
}

TEST(Cost, MissingFunctionCost) {
  FunctionRegistry reg = FunctionRegistry::with_builtins();
  BinaryFn f{"uncosted", scalar_add, {{Kind::Int, I(0)}}, {}, std::nullopt};
  reg.register_binary(f);
  EvalOptions opts;
  opts.registry = &reg;
  Environment env{{"A", vector_from_dense(std::vector<std::int64_t>{1})}};
  EXPECT_EQ(support::error_code([&] { op_count(parse_expression("union[uncosted](A, A)"), env, opts); }),
            ErrorCode::UnknownFunctionCost);
}

TEST(Cost, ReportFormats) {
  Environment env{{"A", matrix_from_dense(dense(2, 3, 1))}, {"B", matrix_from_dense(dense(3, 4, 2))}};
  auto r = op_count(matmul_expr(ir::ref("A"), ir::ref("B")), env);
  auto j = nlohmann::json::parse(cost_report_json(r));
  EXPECT_EQ(j["exact"], 48);
  EXPECT_EQ(j["upper_bound"], 48);
  ASSERT_TRUE(j["breakdown"].is_array());
  std::uint64_t sum = 0;
  for (const auto& e : j["breakdown"]) sum += e["exact"].get<std::uint64_t>();
  EXPECT_EQ(sum, 48u);
  EXPECT_EQ(cost_report_text(r).rfind("exact=48 upper_bound=48\n", 0), 0u);
}

TEST(CostProperty, DenseExactEqualsBound) {
  Gen g(51);
  for (int round = 0; round < 30; ++round) {
    std::size_t m = 1 + g.index(3), n = 1 + g.index(3), l = 1 + g.index(3);
    IntMatrix a = support::random_matrix(g, m, n, 1, 9), b = support::random_matrix(g, n, l, 1, 9);
    Environment env{{"A", matrix_from_dense(a)}, {"B", matrix_from_dense(b)}};
    for (const char* src : {"union[plus](A, A)", "join[times](A, A)", "ext[const(w, 2)](A)",
                            "join[times](A, rename[i -> j, j -> k](B))"}) {
      auto r = op_count(parse_expression(src), env);
      EXPECT_EQ(r.exact, r.upper_bound) << src;
    }
  }
}

TEST(CostProperty, RemovingRecordsNeverIncreasesCost) {
  Gen g(52);
  for (int round = 0; round < 100; ++round) {
    auto a = support::random_table(g, {"i", "j"}, {"v"}, 3, -4, 4, 8);
    auto b = support::random_table(g, {"j", "k"}, {"v"}, 3, -4, 4, 8);
    for (const char* src : {"union[plus](A, B)", "join[times](A, B)", "ext[const(w, 2)](A)", "map[scale(3)](A)"}) {
      auto full = op_count(parse_expression(src), {{"A", a}, {"B", b}});
      auto fewer_a = op_count(parse_expression(src), {{"A", drop_one(g, a)}, {"B", b}});
      auto fewer_b = op_count(parse_expression(src), {{"A", a}, {"B", drop_one(g, b)}});
      EXPECT_LE(fewer_a.exact, full.exact) << src;
      EXPECT_LE(fewer_b.exact, full.exact) << src;
      EXPECT_LE(full.exact, full.upper_bound) << src;
    }
  }
}

TEST(CostProperty, ForNCostEqualsUnrolledCost) {
  Gen g(53);
  // Bodies mention e once; otherwise the unrolled tree recomputes shared iterates.
  const std::vector<std::string> bodies = {"union[plus](e, B)", "map[scale(2)](e)", "join[times](e, B)",
                                           "union[plus](join[times](B, B), map[scale(3)](e))"};
  for (int round = 0; round < 40; ++round) {
    Environment env{{"A", support::random_table(g, {"i"}, {"v"}, 4, 1, 5, 5)},
                    {"B", support::random_table(g, {"i"}, {"v"}, 4, 1, 5, 5)}};
    auto f = ir::fn("e", parse_expression(bodies[g.index(bodies.size())]));
    std::int64_t n = g.range(0, 5);
    Expression unrolled = ir::ref("A");
    for (std::int64_t i = 0; i < n; ++i) unrolled = apply_fn(*f, unrolled);
    auto looped = op_count(ir::for_n(f, n, ir::ref("A")), env);
    auto flat = op_count(unrolled, env);
    EXPECT_EQ(looped.exact, flat.exact);
    EXPECT_EQ(looped.upper_bound, flat.upper_bound);
  }
}
