// Acceptance runner: one PASS/FAIL line per criterion.
//   iterlara_acceptance            run all
//   iterlara_acceptance --only N   run criterion N; exit status reflects it

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>

#include "iterlara/algebra.hpp"
#include "iterlara/bf.hpp"
#include "iterlara/compose.hpp"
#include "iterlara/cost.hpp"
#include "iterlara/dsl.hpp"
#include "iterlara/functions.hpp"
#include "iterlara/table_io.hpp"
#include "support.hpp"

using namespace iterlara;
using support::Gen;
using support::I;

namespace {

using Vec = std::vector<std::int64_t>;

struct Verdict {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

AssociativeTable literal(const std::string& src) { return eval(parse_expression(src), {}); }

std::string show(const AssociativeTable& t) {
  std::string s = format_table(t);
  for (auto& c : s)
    if (c == '\n') c = '/';
  return s;
}

// ---- 1: union, relaxed join and ext on the two example tables

const char* kA =
    "table[a:int, c:int -> x:int = 0, z:int = 0]{(0,0):(1,2),(0,1):(2,4),(1,0):(3,6),(1,1):(4,8)}";
const char* kB =
    "table[c:int, b:int -> z:int = 0, y:int = 0]{(0,0):(1,7),(0,1):(3,5),(1,0):(5,3),(1,1):(7,1)}";

Verdict criterion1() {
  Verdict v;
  Environment env{{"A", literal(kA)}, {"B", literal(kB)}};
  const auto& reg = builtin_registry();

  // Printed table, reproduced as published.
  auto union_want = literal("table[c:int -> x:int = 0, z:int = 0, y:int = 0]{(0):(3,6,7),(1):(4,8,5)}");
  auto union_got = union_tables(env.at("A"), env.at("B"), reg.binary("max"));
  v.check(union_got == union_want, "union[max] got " + show(union_got) + " want " + show(union_want));

  auto join_want = literal(
      "table[a:int, c:int, b:int -> x:int = 0, z:int = 0, y:int = 0]{"
      "(0,0,0):(1,2,7),(0,0,1):(1,6,5),(0,1,0):(2,20,3),(0,1,1):(2,28,1),"
      "(1,0,0):(3,6,7),(1,0,1):(3,18,5),(1,1,0):(4,40,3),(1,1,1):(4,56,1)}");
  auto join_got = relaxed_join(env.at("A"), env.at("B"), reg.binary("times"));
  v.check(join_got == join_want, "join[times] got " + show(join_got));

  auto ext_want = literal("table[a:int, c:int -> w:int = 0]{(0,0):(3),(0,1):(3),(1,0):(3),(1,1):(3)}");
  auto ext_got = eval(parse_expression("ext[const(w, 3)](A)"), env);
  v.check(ext_got == ext_want, "ext[const(w,3)] got " + show(ext_got));
  return v;
}

// ---- 2: average pooling

Verdict criterion2() {
  Verdict v;
  auto got = avgpool1d(vector_from_dense(Vec{1, 3, 4, 5, 7, 9}), 2);
  const double want[] = {2.0, 4.5, 8.0};
  v.check(got.size() == 3, "expected 3 records, got " + std::to_string(got.size()));
  for (std::int64_t i = 0; i < 3; ++i) {
    Scalar k = I(i);
    double x = as_real(got.lookup(std::span<const Scalar>(&k, 1))[0]);
    v.check(std::abs(x - want[i]) <= 1e-9, "entry " + std::to_string(i) + " = " + std::to_string(x));
  }
  return v;
}

// ---- 3: the iteration example

Verdict criterion3() {
  Verdict v;
  Script s = parse_script(
      "fn F(e) = concat(join[times](e, count(e)), B);\n"
      "iter[F; lt(sum(A), 20)](A)");
  Environment env{{"A", vector_from_dense(Vec{1, 2})}, {"B", vector_from_dense(Vec{1})}};
  EvalStats stats;
  auto got = eval(s.program(), env, {}, &stats);
  v.check(got == vector_from_dense(Vec{6, 12, 3, 1}), "result " + show(got));
  v.check(stats.iterations == 2, "body executions " + std::to_string(stats.iterations));
  return v;
}

// ---- 4: operation counts

Verdict criterion4() {
  Verdict v;
  for (std::size_t m = 1; m <= 4; ++m)
    for (std::size_t n = 1; n <= 4; ++n)
      for (std::size_t l = 1; l <= 4; ++l) {
        Gen g(m * 100 + n * 10 + l);
        Environment env{{"A", matrix_from_dense(support::random_matrix(g, m, n, 1, 9))},
                        {"B", matrix_from_dense(support::random_matrix(g, n, l, 1, 9))}};
        auto r = op_count(matmul_expr(ir::ref("A"), ir::ref("B")), env);
        std::uint64_t want = 2 * m * n * l;
        if (r.exact != want || r.upper_bound != want)
          v.check(false, "MatMul " + std::to_string(m) + "x" + std::to_string(n) + "x" + std::to_string(l) +
                             " exact " + std::to_string(r.exact) + " bound " + std::to_string(r.upper_bound));
      }
  Gen g(4);
  for (int round = 0; round < 50; ++round) {
    auto t = support::random_table(g, {"i", "j"}, {"v"}, 4, -5, 5, 10);
    auto r = op_count(ir::lit(t), {});
    v.check(r.exact == 0 && r.upper_bound == 0, "literal costs " + std::to_string(r.exact));
  }
  return v;
}

// ---- 5: determinant and inverse

Verdict criterion5() {
  Verdict v;
  Gen g(5);
  for (int round = 0; round < 200; ++round) {
    std::size_t n = 1 + g.index(5);
    IntMatrix m = support::random_matrix(g, n, n, -3, 3);
    std::int64_t want = support::det_bruteforce(m);
    Scalar fixed = scalar(det_fixed(matrix_from_dense(m), static_cast<std::int64_t>(n)));
    Scalar counted = scalar(det_count(matrix_occupancy(m)));
    if (fixed != I(want) || counted != I(want)) {
      v.check(false, "round " + std::to_string(round) + ": det_fixed " + to_string(fixed) + " det_count " +
                         to_string(counted) + " oracle " + std::to_string(want));
      continue;
    }
    if (want == 0) continue;
    RealMatrix a(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a[i][j] = static_cast<double>(m[i][j]);
    RealMatrix p = matrix_to_dense(matmul(inv_count(matrix_occupancy(m)), matrix_from_dense(a)), n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (std::abs(p[i][j] - (i == j ? 1.0 : 0.0)) > 1e-9)
          v.check(false, "round " + std::to_string(round) + ": inv*A not identity at " + std::to_string(i) + "," +
                             std::to_string(j));
  }
  return v;
}

// ---- 6: BF through the algebra

struct Outcome {
  std::string status = "ok";
  Vec output;
  bool operator==(const Outcome&) const = default;
};

template <class F>
Outcome outcome(F&& f) {
  Outcome o;
  try {
    o.output = f();
  } catch (const Error& e) {
    o.status = error_code_name(e.code());
  }
  return o;
}

std::string random_program(Gen& g, std::size_t budget) {
  static const char ops[] = "><+-.,";
  std::string s;
  while (s.size() < budget) {
    if (budget - s.size() >= 2 && g.coin(0.25)) {
      std::size_t inner = g.index(budget - s.size() - 1);
      s += "[" + random_program(g, inner) + "]";
    } else {
      s += ops[g.index(6)];
    }
  }
  return s;
}

Verdict criterion6() {
  Verdict v;
  const std::uint64_t fuel = 10000;
  auto compare = [&](const std::string& src, const Vec& in) {
    BFProgram p = parse_bf(src);
    Outcome want = outcome([&] { return interpret_bf(p, in, fuel); });
    Outcome got = outcome([&] { return run_bf_via_iterlara(p, in, fuel); });
    if (!(got == want)) v.check(false, "'" + src + "': interp " + want.status + " lara " + got.status);
    return want;
  };

  const std::vector<std::pair<std::string, Vec>> corpus = {
      {",[.,]", {3, 1, 2}},                                            // echo
      {",>,[<+>-]<.", {4, 5}},                                         // add
      {"+++[>++[>+<-]<-]>>.", {}},                                     // nested multiply
      {"++++++++[>+++++++++<-]>.<+++++[>+++++++<-]>--.", {}},          // "Hi"
      {",[>+>+<<-]>.>.", {5}},                                         // copy twice
      {",>,<[>[>+>+<<-]>>[<<+>>-]<<<-]>>.", {3, 4}},                   // product
      {"+[]", {}},                                                     // runs out of fuel
  };
  int exhausted = 0;
  for (const auto& [src, in] : corpus)
    if (compare(src, in).status == "FuelExhausted") ++exhausted;
  v.check(exhausted == 1, "corpus fuel exhaustion count " + std::to_string(exhausted));

  Gen g(6);
  for (int round = 0; round < 500; ++round) {
    std::string src = random_program(g, 1 + g.index(12));
    Vec in;
    for (std::size_t i = 0, n = g.index(4); i < n; ++i) in.push_back(g.range(0, 3));
    compare(src, in);
  }
  return v;
}

// ---- 7: loop unrolling and statement composition

std::string random_rhs(Gen& g, const std::vector<std::string>& names) {
  auto p = [&] { return names[g.index(names.size())]; };
  switch (g.index(6)) {
    case 0: return "union[plus](" + p() + ", " + p() + ")";
    case 1: return "join[times](" + p() + ", " + p() + ")";
    case 2: return "map[scale(" + std::to_string(g.range(-2, 3)) + ")](" + p() + ")";
    case 3: return "union[max](" + p() + ", " + p() + ")";
    case 4: return "concat(" + p() + ", " + p() + ")";
    default: return "select[v > " + std::to_string(g.range(-2, 2)) + "](" + p() + ")";
  }
}

Verdict criterion7() {
  Verdict v;
  Gen g(7);
  const std::vector<std::string> bodies = {"union[plus](e, B)", "map[scale(2)](e)", "concat(e, B)",
                                           "join[times](e, union[plus](e, B))", "union[max](e, map[scale(-1)](e))"};
  for (int round = 0; round < 40; ++round) {
    Environment env{{"A", support::random_table(g, {"i"}, {"v"}, 3, -3, 3, 4)},
                    {"B", support::random_table(g, {"i"}, {"v"}, 3, -3, 3, 4)}};
    auto f = ir::fn("e", parse_expression(bodies[g.index(bodies.size())]));
    for (std::int64_t n = 0; n <= 8; ++n) {
      Expression unrolled = ir::ref("A");
      for (std::int64_t i = 0; i < n; ++i) unrolled = apply_fn(*f, unrolled);
      if (!(eval(ir::for_n(f, n, ir::ref("A")), env) == eval(unrolled, env)))
        v.check(false, "for^" + std::to_string(n) + " over " + print_expression(f->body));
    }
  }

  for (int round = 0; round < 100; ++round) {
    Environment env{{"A", vector_from_dense(Vec{g.range(-3, 3), g.range(-3, 3)})},
                    {"B", vector_from_dense(Vec{g.range(-3, 3)})}};
    std::vector<std::string> names{"A", "B"};
    std::vector<std::pair<std::string, Expression>> stmts;
    for (std::size_t i = 0, n = 1 + g.index(5); i < n; ++i) {
      std::string target = std::vector<std::string>{"A", "X", "Y", "Z"}[g.index(4)];
      stmts.push_back({target, parse_expression(random_rhs(g, names))});
      if (std::find(names.begin(), names.end(), target) == names.end()) names.push_back(target);
    }
    const std::string result = stmts[g.index(stmts.size())].first;
    if (!(eval(compose_statements(stmts, result), env) == support::sequential_oracle(stmts, result, env)))
      v.check(false, "script " + std::to_string(round));
  }
  return v;
}

// ---- 8: the registry rejects subtraction

Verdict criterion8() {
  Verdict v;
  FunctionRegistry reg;
  try {
    reg.register_binary(make_binary_from_expr("minus", "x", "y", parse_scalar("x - y"), I(0), 1));
    v.check(false, "subtraction was accepted");
  } catch (const PropertyViolation& e) {
    const auto& c = e.counterexample();
    v.check(e.property() == "commutativity", "property " + e.property());
    v.check(c.size() >= 2 && scalar_sub(c[0], c[1]) != scalar_sub(c[1], c[0]), "counterexample does not differ");
    if (v.pass) v.detail = "counterexample x=" + to_string(c[0]) + " y=" + to_string(c[1]);
  }
  v.check(!reg.has_binary("minus"), "minus left registered");
  return v;
}

struct Criterion {
  const char* name;
  double limit_s;
  std::function<Verdict()> run;
};

const Criterion kCriteria[] = {
    {"example union, relaxed join and ext tables", 1, criterion1},
    {"average pooling example", 1, criterion2},
    {"iteration example result and body count", 1, criterion3},
    {"MatMul cost 2MNL and free literals", 5, criterion4},
    {"determinant and inverse on 200 random matrices", 60, criterion5},
    {"BF corpus and 500 random programs via the algebra", 120, criterion6},
    {"for^n unrolling and statement composition", 30, criterion7},
    {"subtraction rejected as a union function", 1, criterion8},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  bool all = true;
  for (int i = 1; i <= 8; ++i) {
    if (only && i != only) continue;
    const Criterion& c = kCriteria[i - 1];
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.check(secs < c.limit_s, "took " + std::to_string(secs) + " s");
    std::ostringstream line;
    line << (v.pass ? "PASS" : "FAIL") << " " << i << " " << c.name << " (" << std::fixed;
    line.precision(3);
    line << secs << " s)";
    if (!v.detail.empty()) line << ": " << v.detail;
    std::cout << line.str() << std::endl;
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
