#include <gtest/gtest.h>

#include "iterlara/compose.hpp"
#include "iterlara/dsl.hpp"
#include "iterlara/error.hpp"
#include "iterlara/eval.hpp"
#include "iterlara/state.hpp"
#include "iterlara/stdlib.hpp"
#include "support.hpp"

using namespace iterlara;
using support::Gen;
using support::I;

namespace {

using Vec = std::vector<std::int64_t>;
using Stmts = std::vector<std::pair<std::string, Expression>>;

AssociativeTable vec(const Vec& v) { return vector_from_dense(v); }

std::string random_rhs(Gen& g, const std::vector<std::string>& names) {
  auto p = [&] { return names[g.index(names.size())]; };
  switch (g.index(7)) {
    case 0: return "union[plus](" + p() + ", " + p() + ")";
    case 1: return "join[times](" + p() + ", " + p() + ")";
    case 2: return "map[scale(" + std::to_string(g.range(-2, 3)) + ")](" + p() + ")";
    case 3: return "union[max](" + p() + ", " + p() + ")";
    case 4: return "select[v > " + std::to_string(g.range(-2, 2)) + "](" + p() + ")";
    case 5: return "concat(" + p() + ", " + p() + ")";
    default: return "join[times](" + p() + ", count(" + p() + "))";
  }
}

// Executes statements one at a time, loops included.
void run_sequential(const std::vector<Stmt>& stmts, Environment& env) {
  for (const auto& s : stmts) {
    if (!s.loop) {
      env[s.name] = eval(s.expr, env);
      continue;
    }
    const LoopStmt& l = *s.loop;
    if (l.kind == LoopStmt::Kind::While) {
      while (boole(eval(l.cond, env))) run_sequential(l.body, env);
    } else {
      std::int64_t n = l.kind == LoopStmt::Kind::ForN ? l.n : as_int(scalar(eval(l.cond, env)));
      for (std::int64_t i = 0; i < n; ++i) run_sequential(l.body, env);
    }
  }
}

}  // namespace

TEST(Compose, ReducesToSingleExpression) {
  Environment env{{"A", vec({1, 2})}, {"B", vec({3})}};
  Stmts s{{"X", parse_expression("union[plus](A, B)")}, {"Y", parse_expression("map[scale(2)](X)")},
           {"X", parse_expression("concat(X, Y)")}};
  EXPECT_EQ(eval(compose_statements(s, "X"), env), vec({4, 2, 8, 4}));
  EXPECT_EQ(eval(compose_statements(s, "Y"), env), vec({8, 4}));
}

TEST(Compose, StateResultHoldsEverySlot) {
  Environment env{{"A", vec({1})}};
  Stmts s{{"X", parse_expression("map[scale(5)](A)")}, {"A", parse_expression("union[plus](A, X)")}};
  auto st = eval(compose_statements(s, ""), env);
  EXPECT_EQ(state_get(st, "X"), vec({5}));
  EXPECT_EQ(state_get(st, "A"), vec({6}));
  EXPECT_EQ(support::error_code([&] { state_get(st, "Q"); }), ErrorCode::UnknownName);
}

TEST(Compose, Errors) {
  Stmts reserved{{"__x", parse_expression("A")}};
  EXPECT_EQ(support::error_code([&] { compose_statements(reserved, "__x"); }), ErrorCode::NameClash);
  Stmts s{{"X", parse_expression("A")}};
  EXPECT_EQ(support::error_code([&] { compose_statements(s, "Y"); }), ErrorCode::UnknownName);
}

TEST(Compose, LoopStatements) {
  // X doubles while its sum stays below 50; Y counts the passes.
  Environment env{{"A", vec({3})}};
  std::vector<Stmt> s{Stmt::assign("X", parse_expression("A")), Stmt::assign("Y", parse_expression("0")),
                      Stmt::while_loop(parse_expression("lt(sum(X), 50)"),
                                       {Stmt::assign("X", parse_expression("map[scale(2)](X)")),
                                        Stmt::assign("Y", parse_expression("union[plus](Y, 1)"))}),
                      Stmt::for_n(2, {Stmt::assign("X", parse_expression("concat(X, A)"))})};
  Environment seq = env;
  run_sequential(s, seq);
  EXPECT_EQ(eval(compose_statements(s, "X"), env), seq.at("X"));
  EXPECT_EQ(eval(compose_statements(s, "Y"), env), seq.at("Y"));
  EXPECT_EQ(seq.at("Y"), scalar_table(I(5)));  // 3, 6, 12, 24, 48
}

TEST(Compose, ZeroTripLoopKeepsInputValue) {
  Environment env{{"A", vec({1, 2})}, {"B", vec({7})}};
  std::vector<Stmt> s{Stmt::for_cond(parse_expression("count(select[v > 9](B))"),
                                     {Stmt::assign("A", parse_expression("map[scale(3)](A)"))})};
  EXPECT_EQ(eval(compose_statements(s, "A"), env), vec({1, 2}));
}

TEST(ComposeProperty, MatchesSequentialBinding) {
  Gen g(41);
  for (int round = 0; round < 150; ++round) {
    Environment env{{"A", vec({g.range(-3, 3), g.range(-3, 3)})}, {"B", vec({g.range(-3, 3)})}};
    std::vector<std::string> names{"A", "B"};
    Stmts s;
    std::size_t n = 1 + g.index(4);
    for (std::size_t i = 0; i < n; ++i) {
      std::string target = std::vector<std::string>{"A", "X", "Y", "Z"}[g.index(4)];
      s.push_back({target, parse_expression(random_rhs(g, names))});
      if (std::find(names.begin(), names.end(), target) == names.end()) names.push_back(target);
    }
    const std::string& result = s[g.index(s.size())].first;
    EXPECT_EQ(eval(compose_statements(s, result), env), support::sequential_oracle(s, result, env))
        << print_expression(compose_statements(s, result));
  }
}

TEST(ComposeProperty, LoopsMatchSequentialExecution) {
  Gen g(42);
  for (int round = 0; round < 60; ++round) {
    Environment env{{"A", vec({g.range(-3, 3), g.range(-3, 3)})}, {"B", vec({g.range(-3, 3)})}};
    std::vector<std::string> names{"A", "B"};
    std::vector<Stmt> body;
    for (std::size_t i = 0, n = 1 + g.index(3); i < n; ++i) {
      std::string target = std::vector<std::string>{"A", "X"}[g.index(2)];
      body.push_back(Stmt::assign(target, parse_expression(random_rhs(g, names))));
      if (target == "X" && names.size() == 2) names.push_back("X");
    }
    std::vector<Stmt> s{Stmt::assign("X", parse_expression("B"))};
    if (g.coin())
      s.push_back(Stmt::for_n(g.range(0, 4), body));
    else
      s.push_back(Stmt::for_cond(parse_expression("count(B)"), body));
    Environment seq = env;
    run_sequential(s, seq);
    EXPECT_EQ(eval(compose_statements(s, "X"), env), seq.at("X"));
    bool assigns_a = std::any_of(body.begin(), body.end(), [](const Stmt& st) { return st.name == "A"; });
    if (assigns_a) EXPECT_EQ(eval(compose_statements(s, "A"), env), seq.at("A"));
  }
}
