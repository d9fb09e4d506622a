#include <gtest/gtest.h>

#include "iterlara/dsl.hpp"
#include "iterlara/error.hpp"
#include "iterlara/eval.hpp"
#include "iterlara/stdlib.hpp"
#include "support.hpp"

using namespace iterlara;
using support::Gen;
using support::I;

namespace {

using Vec = std::vector<std::int64_t>;

AssociativeTable vec(const Vec& v) { return vector_from_dense(v); }

Expression expr(const std::string& src) { return parse_expression(src); }

ExprFnPtr fn_of(const std::string& body) { return ir::fn("e", expr(body)); }

// Loop bodies over vectors e, A, B.
const std::vector<std::string> kBodies = {
    "union[plus](e, B)",
    "map[scale(2)](e)",
    "join[times](e, count(e))",
    "concat(e, B)",
    "union[max](e, map[scale(-1)](e))",
    "select[v > 0](union[plus](e, B))",
    "union[plus](join[times](e, B), e)",
};

Environment vectors(Gen& g) {
  auto pick = [&] {
    Vec v(1 + g.index(4));
    for (auto& x : v) x = g.range(-3, 3);
    return vec(v);
  };
  return {{"A", pick()}, {"B", pick()}};
}

class CountingObserver : public EvalObserver {
public:
  void on_iteration(const Node&) override { ++iterations; }
  std::uint64_t iterations = 0;
};

}  // namespace

TEST(Eval, IterationExampleOracle) {
  Environment env{{"A", vec({1, 2})}, {"B", vec({1})}};
  auto f = fn_of("concat(join[times](e, count(e)), B)");
  EvalStats st;
  auto got = iterate(f, expr("lt(sum(e), 20)"), ir::ref("A"), env, 100, &st);

  Vec e{1, 2};
  int rounds = 0;
  auto total = [](const Vec& v) { std::int64_t s = 0; for (auto x : v) s += x; return s; };
  while (total(e) < 20) {
    auto n = static_cast<std::int64_t>(e.size());
    for (auto& x : e) x *= n;
    e.push_back(1);
    ++rounds;
  }
  EXPECT_EQ(got, vec(e));
  EXPECT_EQ(st.iterations, static_cast<std::uint64_t>(rounds));
  EXPECT_EQ(e, (Vec{6, 12, 3, 1}));
}

TEST(Eval, IterConditionReadsCurrentValue) {
  // Both the parameter and the seed's name denote the current iterate.
  Environment env{{"A", vec({1})}};
  auto f = fn_of("map[scale(2)](e)");
  EXPECT_EQ(eval(ir::iter(f, expr("lt(sum(e), 10)"), ir::ref("A")), env), vec({16}));
  EXPECT_EQ(eval(ir::iter(f, expr("lt(sum(A), 10)"), ir::ref("A")), env), vec({16}));
}

TEST(Eval, FuelExhaustion) {
  Environment env{{"A", vec({1})}};
  EvalOptions opts;
  opts.fuel = 50;
  auto forever = ir::iter(fn_of("e"), expr("gt(sum(e), 0)"), ir::ref("A"));
  EXPECT_EQ(support::error_code([&] { eval(forever, env, opts); }), ErrorCode::FuelExhausted);
  opts.fuel = 3;
  EXPECT_NO_THROW(eval(ir::for_n(fn_of("e"), 3, ir::ref("A")), env, opts));
  EXPECT_EQ(support::error_code([&] { eval(ir::for_n(fn_of("e"), 4, ir::ref("A")), env, opts); }),
            ErrorCode::FuelExhausted);
}

TEST(Eval, FuelIsSharedByNestedLoops) {
  Environment env{{"A", vec({1})}};
  auto inner = ir::fn("e", ir::for_n(fn_of("e"), 3, ir::ref("e")));
  auto outer = ir::for_n(inner, 3, ir::ref("A"));
  EvalOptions opts;
  EvalStats st;
  eval(outer, env, opts, &st);
  EXPECT_EQ(st.iterations, 12u);
  opts.fuel = 11;
  EXPECT_EQ(support::error_code([&] { eval(outer, env, opts); }), ErrorCode::FuelExhausted);
}

TEST(Eval, LoopCountErrors) {
  Environment env{{"A", vec({1})}, {"R", scalar_table(Scalar{2.5})}, {"N", scalar_table(I(-2))}};
  EXPECT_EQ(support::error_code([&] { eval(ir::for_n(fn_of("e"), -1, ir::ref("A")), env); }), ErrorCode::NegativeCond);
  EXPECT_EQ(support::error_code([&] { eval(ir::for_cond(fn_of("e"), ir::ref("R"), ir::ref("A")), env); }),
            ErrorCode::NonIntegerCond);
  EXPECT_EQ(support::error_code([&] { eval(ir::for_cond(fn_of("e"), ir::ref("N"), ir::ref("A")), env); }),
            ErrorCode::NegativeCond);
  EXPECT_EQ(support::error_code([&] { eval(ir::ref("Q"), env); }), ErrorCode::UnboundName);
}

TEST(Eval, ErrorsCarryIrPath) {
  Environment env{{"A", vec({1})}};
  try {
    eval(expr("union[plus](A, project[q](A))"), env);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownAttribute);
    EXPECT_FALSE(e.ir_path().empty());
  }
}

TEST(Eval, LetScopesAndShadowing) {
  Environment env{{"A", vec({1, 2})}};
  EXPECT_EQ(eval(expr("let x = map[scale(3)](A) in union[plus](x, A)"), env), vec({4, 8}));
  EXPECT_EQ(eval(expr("let A = map[scale(3)](A) in A"), env), vec({3, 6}));
}

TEST(Eval, AuxiliaryUpdatesRunEachIteration) {
  // e := e ⧗ B ; B := 2B, three times: A + B + 2B + 4B.
  Environment env{{"A", vec({1})}, {"B", vec({1})}};
  auto f = ir::fn("e", expr("union[plus](e, B)"), {{"B", expr("map[scale(2)](B)")}});
  EXPECT_EQ(eval(ir::for_n(f, 3, ir::ref("A")), env), vec({8}));
}

TEST(Eval, ObserverSeesEveryIteration) {
  Environment env{{"A", vec({1, 2})}, {"B", vec({1})}};
  CountingObserver obs;
  EvalOptions opts;
  opts.observer = &obs;
  EvalStats st;
  eval(expr("iter[(e) => concat(join[times](e, count(e)), B); lt(sum(e), 20)](A)"), env, opts, &st);
  EXPECT_EQ(obs.iterations, 2u);
  EXPECT_EQ(st.iterations, 2u);
}

TEST(EvalProperty, ForNEqualsLiteralUnrolling) {
  Gen g(31);
  for (int round = 0; round < 80; ++round) {
    Environment env = vectors(g);
    std::string body = kBodies[g.index(kBodies.size())];
    Expression b = expr(body);
    if (g.coin(0.4)) {
      std::string outer = kBodies[g.index(kBodies.size())];
      b = substitute(expr(outer), "e", b);
      body = outer + " o " + body;
    }
    auto f = ir::fn("e", b);
    std::int64_t n = g.range(0, 8);
    Expression unrolled = ir::ref("A");
    for (std::int64_t i = 0; i < n; ++i) unrolled = apply_fn(*f, unrolled);
    EXPECT_EQ(eval(ir::for_n(f, n, ir::ref("A")), env), eval(unrolled, env)) << body << " n=" << n;
  }
}

TEST(EvalProperty, PrecomputedConditionLoopsAgree) {
  Gen g(32);
  for (int round = 0; round < 40; ++round) {
    Environment env = vectors(g);
    auto f = fn_of(kBodies[g.index(kBodies.size())]);
    std::int64_t k = g.range(0, 6);
    env["T"] = vec(Vec(static_cast<std::size_t>(k), 1));
    env["C"] = scalar_table(I(k));
    auto counted = ir::for_cond(f, ir::count(ir::ref("T")), ir::ref("A"));
    auto fixed = ir::for_n(f, k, ir::ref("A"));
    auto with_counter = ir::fn("e", f->body, {{"C", expr("union[plus](C, -1)")}});
    auto looped = ir::iter(with_counter, expr("gt(C, 0)"), ir::ref("A"));
    if (k == 0) env["T"] = AssociativeTable(vec({1}).schema());
    auto a = eval(counted, env);
    EXPECT_EQ(a, eval(fixed, env));
    EXPECT_EQ(a, eval(looped, env));
  }
}

TEST(EvalProperty, Deterministic) {
  Gen g(33);
  for (int round = 0; round < 30; ++round) {
    Environment env = vectors(g);
    auto e = ir::for_n(fn_of(kBodies[g.index(kBodies.size())]), g.range(0, 4), ir::ref("A"));
    EXPECT_EQ(eval(e, env), eval(e, env));
  }
}
