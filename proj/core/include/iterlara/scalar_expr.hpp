#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iterlara/scalar.hpp"

namespace iterlara {

// Closed scalar language used for user-defined functions and select predicates.
struct ScalarExpr;
using ScalarExprPtr = std::shared_ptr<const ScalarExpr>;

struct ScalarExpr {
  enum class Op { Lit, Var, Neg, Not, Add, Sub, Mul, Div, Mod, Lt, Le, Eq, Ne, Gt, Ge, And, Or, Call };
  Op op = Op::Lit;
  Scalar lit = std::int64_t{0};
  std::string name;  // Var / Call
  std::vector<ScalarExprPtr> args;
};

namespace sx {
ScalarExprPtr lit(Scalar v);
ScalarExprPtr var(std::string name);
ScalarExprPtr unary(ScalarExpr::Op op, ScalarExprPtr a);
ScalarExprPtr binary(ScalarExpr::Op op, ScalarExprPtr a, ScalarExprPtr b);
ScalarExprPtr call(std::string name, std::vector<ScalarExprPtr> args);
}  // namespace sx

struct ScalarEnv {
  // Resolves a variable; nullopt means unknown (UnknownAttribute).
  std::function<std::optional<Scalar>(std::string_view)> var;
  // Resolves calls that are not built in (e.g. registered predicates).
  std::function<std::optional<Scalar>(std::string_view, const std::vector<Scalar>&)> call;
};

// Built-in calls: max, min, abs, if(c,a,b), real(x), int(x).
Scalar eval_scalar(const ScalarExpr& e, const ScalarEnv& env);

bool operator==(const ScalarExpr& a, const ScalarExpr& b);
bool equal(const ScalarExprPtr& a, const ScalarExprPtr& b);

// Source text with minimal parentheses; parses back to the same tree.
std::string print_scalar_expr(const ScalarExpr& e);
// Literal as written in source: 3, 2.0, true, "text".
std::string scalar_literal(const Scalar& s);

// Arithmetic shared with the built-in binary functions.
Scalar scalar_add(const Scalar& a, const Scalar& b);
Scalar scalar_mul(const Scalar& a, const Scalar& b);
Scalar scalar_sub(const Scalar& a, const Scalar& b);
Scalar scalar_div(const Scalar& a, const Scalar& b);

}  // namespace iterlara
