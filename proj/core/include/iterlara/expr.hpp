#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "iterlara/algebra.hpp"
#include "iterlara/functions.hpp"
#include "iterlara/scalar_expr.hpp"
#include "iterlara/table.hpp"

namespace iterlara {

struct Node;
using Expression = std::shared_ptr<const Node>;

enum class NodeKind { TableRef, TableLit, Union, StrictJoin, RelaxedJoin, Ext, Map, Relational, Iter, ForN, ForCond, Let };

enum class RelOp {
  Select,
  Project,
  Rename,
  Aggregate,
  SetUnion,
  Intersect,
  Difference,
  Divide,
  AntijoinL,
  AntijoinR,
  Concat,
  Lt,
  Le,
  Eq,
  Ne,
  Gt,
  Ge,
  StateInit,
  StateGet,
  StateSet,
};

const char* rel_op_name(RelOp op);
int rel_op_arity(RelOp op);  // -1 for variadic (state_init)

// F: e -> body, optionally followed by auxiliary updates name := expr that
// run after the main update in every iteration.
struct ExprFn {
  std::string param;
  Expression body;
  std::vector<std::pair<std::string, Expression>> aux;
  std::string name;  // informational; ignored by equality
};
using ExprFnPtr = std::shared_ptr<const ExprFn>;

struct Node {
  NodeKind kind = NodeKind::TableRef;
  std::string name;        // TableRef, Let binder
  AssociativeTable table;  // TableLit
  std::string fn;          // Union / joins / Aggregate
  FnRef fref;              // Ext / Map
  RelOp rel = RelOp::Select;
  std::vector<std::string> names;  // Project attrs, Aggregate keys, state slot names
  std::vector<std::pair<std::string, std::string>> renames;
  ScalarExprPtr pred;              // Select
  std::vector<Expression> args;    // operands; loops: [seed] or [cond, seed]
  ExprFnPtr body;                  // loops
  std::int64_t n = 0;              // ForN
};

namespace ir {
Expression ref(std::string name);
Expression lit(AssociativeTable t);
Expression union_(Expression a, Expression b, std::string fn);
Expression sjoin(Expression a, Expression b, std::string fn);
Expression join(Expression a, Expression b, std::string fn);
Expression ext(Expression a, FnRef f);
Expression map(Expression a, FnRef f);
Expression select(Expression a, ScalarExprPtr pred);
Expression project(Expression a, std::vector<std::string> attrs);
Expression rename(Expression a, std::vector<std::pair<std::string, std::string>> pairs);
Expression aggregate(Expression a, std::string fn, std::vector<std::string> keys);
Expression rel(RelOp op, std::vector<Expression> args);
Expression state_init(std::vector<std::string> names, std::vector<Expression> args);
Expression state_get(Expression s, std::string name);
Expression state_set(Expression s, std::string name, Expression value);
Expression iter(ExprFnPtr f, Expression cond, Expression seed);
Expression for_n(ExprFnPtr f, std::int64_t n, Expression seed);
Expression for_cond(ExprFnPtr f, Expression cond, Expression seed);
Expression let(std::string name, Expression value, Expression body);
ExprFnPtr fn(std::string param, Expression body, std::vector<std::pair<std::string, Expression>> aux = {},
             std::string name = {});
// sum(A) = γ_+ over no keys; count(A) = sum(map one(A)).
Expression sum(Expression a);
Expression count(Expression a);
}  // namespace ir

bool equal(const Expression& a, const Expression& b);
bool equal(const ExprFnPtr& a, const ExprFnPtr& b);

// Replaces free references to `name` (respecting Let and loop binders).
Expression substitute(const Expression& e, const std::string& name, const Expression& replacement);
// Simultaneous substitution.
Expression substitute(const Expression& e, const std::map<std::string, Expression>& repl);
// Applies F literally: body with the parameter replaced by `arg`.
Expression apply_fn(const ExprFn& f, const Expression& arg);
// Names referenced but not bound inside e.
std::set<std::string> free_names(const Expression& e);

// Preorder numbering of the nodes of a tree (loop bodies included).
std::unordered_map<const Node*, std::size_t> number_nodes(const Expression& e);
// Short label of a node: "union[max]", "ext[reshape(2)]", "iter", ...
std::string node_label(const Node& n);

}  // namespace iterlara
