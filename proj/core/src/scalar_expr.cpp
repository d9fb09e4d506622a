#include "iterlara/scalar_expr.hpp"

#include <cmath>

#include "iterlara/error.hpp"

namespace iterlara {

using Op = ScalarExpr::Op;

namespace sx {

ScalarExprPtr lit(Scalar v) {
  auto e = std::make_shared<ScalarExpr>();
  e->op = Op::Lit;
  e->lit = v;
  return e;
}

ScalarExprPtr var(std::string name) {
  auto e = std::make_shared<ScalarExpr>();
  e->op = Op::Var;
  e->name = std::move(name);
  return e;
}

ScalarExprPtr unary(Op op, ScalarExprPtr a) {
  auto e = std::make_shared<ScalarExpr>();
  e->op = op;
  e->args = {std::move(a)};
  return e;
}

ScalarExprPtr binary(Op op, ScalarExprPtr a, ScalarExprPtr b) {
  auto e = std::make_shared<ScalarExpr>();
  e->op = op;
  e->args = {std::move(a), std::move(b)};
  return e;
}

ScalarExprPtr call(std::string name, std::vector<ScalarExprPtr> args) {
  auto e = std::make_shared<ScalarExpr>();
  e->op = Op::Call;
  e->name = std::move(name);
  e->args = std::move(args);
  return e;
}

}  // namespace sx

namespace {

bool both_int(const Scalar& a, const Scalar& b) { return kind_of(a) == Kind::Int && kind_of(b) == Kind::Int; }

void need_numeric(const Scalar& a, const char* what) {
  if (!is_numeric(kind_of(a)))
    fail(ErrorCode::SchemaMismatch, std::string(what) + " expects numeric operands, got " + kind_name(kind_of(a)));
}

bool truthy(const Scalar& s) {
  if (auto b = std::get_if<bool>(&s)) return *b;
  fail(ErrorCode::SchemaMismatch, "expected a bool, got " + std::string(kind_name(kind_of(s))));
}

int compare_values(const Scalar& a, const Scalar& b) {
  if (is_numeric(kind_of(a)) && is_numeric(kind_of(b)) && kind_of(a) != kind_of(b)) {
    double x = as_real(a), y = as_real(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (kind_of(a) != kind_of(b))
    fail(ErrorCode::SchemaMismatch, std::string("cannot compare ") + kind_name(kind_of(a)) + " with " +
                                        kind_name(kind_of(b)));
  return compare(a, b);
}

}  // namespace

Scalar scalar_add(const Scalar& a, const Scalar& b) {
  need_numeric(a, "+");
  need_numeric(b, "+");
  if (both_int(a, b)) return Scalar{std::get<0>(a) + std::get<0>(b)};
  return Scalar{as_real(a) + as_real(b)};
}

Scalar scalar_sub(const Scalar& a, const Scalar& b) {
  need_numeric(a, "-");
  need_numeric(b, "-");
  if (both_int(a, b)) return Scalar{std::get<0>(a) - std::get<0>(b)};
  return Scalar{as_real(a) - as_real(b)};
}

Scalar scalar_mul(const Scalar& a, const Scalar& b) {
  need_numeric(a, "*");
  need_numeric(b, "*");
  if (both_int(a, b)) return Scalar{std::get<0>(a) * std::get<0>(b)};
  return Scalar{as_real(a) * as_real(b)};
}

Scalar scalar_div(const Scalar& a, const Scalar& b) {
  need_numeric(a, "/");
  need_numeric(b, "/");
  return Scalar{as_real(a) / as_real(b)};
}

Scalar eval_scalar(const ScalarExpr& e, const ScalarEnv& env) {
  auto arg = [&](std::size_t i) { return eval_scalar(*e.args.at(i), env); };
  switch (e.op) {
    case Op::Lit: return e.lit;
    case Op::Var: {
      if (env.var)
        if (auto v = env.var(e.name)) return *v;
      fail(ErrorCode::UnknownAttribute, "unknown variable '" + e.name + "'");
    }
    case Op::Neg: {
      Scalar a = arg(0);
      need_numeric(a, "unary -");
      if (kind_of(a) == Kind::Int) return Scalar{-std::get<0>(a)};
      return Scalar{-std::get<1>(a)};
    }
    case Op::Not: return Scalar{!truthy(arg(0))};
    case Op::Add: return scalar_add(arg(0), arg(1));
    case Op::Sub: return scalar_sub(arg(0), arg(1));
    case Op::Mul: return scalar_mul(arg(0), arg(1));
    case Op::Div: return scalar_div(arg(0), arg(1));
    case Op::Mod: {
      Scalar a = arg(0), b = arg(1);
      if (!both_int(a, b)) fail(ErrorCode::SchemaMismatch, "% expects integers");
      if (std::get<0>(b) == 0) fail(ErrorCode::InvalidArgument, "modulo by zero");
      return Scalar{std::get<0>(a) % std::get<0>(b)};
    }
    case Op::Lt: return Scalar{compare_values(arg(0), arg(1)) < 0};
    case Op::Le: return Scalar{compare_values(arg(0), arg(1)) <= 0};
    case Op::Eq: return Scalar{compare_values(arg(0), arg(1)) == 0};
    case Op::Ne: return Scalar{compare_values(arg(0), arg(1)) != 0};
    case Op::Gt: return Scalar{compare_values(arg(0), arg(1)) > 0};
    case Op::Ge: return Scalar{compare_values(arg(0), arg(1)) >= 0};
    case Op::And: return Scalar{truthy(arg(0)) && truthy(arg(1))};
    case Op::Or: return Scalar{truthy(arg(0)) || truthy(arg(1))};
    case Op::Call: {
      const std::string& f = e.name;
      if (f == "if") {
        if (e.args.size() != 3) fail(ErrorCode::InvalidArgument, "if expects 3 arguments");
        return truthy(arg(0)) ? arg(1) : arg(2);
      }
      std::vector<Scalar> xs;
      for (std::size_t i = 0; i < e.args.size(); ++i) xs.push_back(arg(i));
      if (f == "max" || f == "min") {
        if (xs.empty()) fail(ErrorCode::InvalidArgument, f + " expects arguments");
        Scalar best = xs[0];
        for (std::size_t i = 1; i < xs.size(); ++i) {
          int c = compare_values(xs[i], best);
          if ((f == "max" && c > 0) || (f == "min" && c < 0)) best = xs[i];
        }
        return best;
      }
      if (f == "abs" && xs.size() == 1) {
        need_numeric(xs[0], "abs");
        if (kind_of(xs[0]) == Kind::Int) return Scalar{std::get<0>(xs[0]) < 0 ? -std::get<0>(xs[0]) : std::get<0>(xs[0])};
        return Scalar{std::fabs(std::get<1>(xs[0]))};
      }
      if (f == "real" && xs.size() == 1) return Scalar{as_real(xs[0])};
      if (f == "int" && xs.size() == 1) {
        need_numeric(xs[0], "int");
        return Scalar{static_cast<std::int64_t>(std::trunc(as_real(xs[0])))};
      }
      if (env.call)
        if (auto v = env.call(f, xs)) return *v;
      fail(ErrorCode::UnknownFunction, "unknown scalar function '" + f + "'");
    }
  }
  fail(ErrorCode::InvalidArgument, "bad scalar expression");
}

bool operator==(const ScalarExpr& a, const ScalarExpr& b) {
  if (a.op != b.op || a.name != b.name || a.args.size() != b.args.size()) return false;
  if (a.op == Op::Lit && !same(a.lit, b.lit)) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!equal(a.args[i], b.args[i])) return false;
  return true;
}

bool equal(const ScalarExprPtr& a, const ScalarExprPtr& b) {
  if (!a || !b) return !a && !b;
  return *a == *b;
}

std::string scalar_literal(const Scalar& s) {
  switch (s.index()) {
    case 0: return std::to_string(std::get<0>(s));
    case 1: {
      std::string t = format_real(std::get<1>(s));
      if (t.find_first_of(".eni") == std::string::npos) t += ".0";
      return t;
    }
    case 2: return std::get<2>(s) ? "true" : "false";
    default: {
      std::string q = "\"";
      for (char c : std::get<3>(s).str()) {
        if (c == '"' || c == '\\') q += '\\';
        q += c;
      }
      return q + "\"";
    }
  }
}

namespace {

int precedence(Op op) {
  switch (op) {
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::Lt: case Op::Le: case Op::Eq: case Op::Ne: case Op::Gt: case Op::Ge: return 3;
    case Op::Add: case Op::Sub: return 4;
    case Op::Mul: case Op::Div: case Op::Mod: return 5;
    case Op::Neg: case Op::Not: return 6;
    default: return 7;
  }
}

const char* op_text(Op op) {
  switch (op) {
    case Op::Or: return "||";
    case Op::And: return "&&";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Mod: return "%";
    default: return "?";
  }
}

std::string wrap(const ScalarExpr& e, bool parens) {
  std::string s = print_scalar_expr(e);
  return parens ? "(" + s + ")" : s;
}

}  // namespace

std::string print_scalar_expr(const ScalarExpr& e) {
  switch (e.op) {
    case Op::Lit: return scalar_literal(e.lit);
    case Op::Var: return e.name;
    case Op::Neg: {
      // Parenthesize so "-(3)" is not re-read as the literal -3.
      return "-(" + print_scalar_expr(*e.args[0]) + ")";
    }
    case Op::Not: return "!" + wrap(*e.args[0], precedence(e.args[0]->op) < precedence(Op::Not));
    case Op::Call: {
      std::string s = e.name + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) s += (i ? ", " : "") + print_scalar_expr(*e.args[i]);
      return s + ")";
    }
    default: {
      int p = precedence(e.op);
      const ScalarExpr& l = *e.args[0];
      const ScalarExpr& r = *e.args[1];
      bool lp = precedence(l.op) < p;
      bool rp = precedence(r.op) <= p;
      return wrap(l, lp) + " " + op_text(e.op) + " " + wrap(r, rp);
    }
  }
}

}  // namespace iterlara
